"""Brute-force path-sum oracle for the column walk.

Enumerates every lattice path from a point excitation, multiplying the
transmission/reflection coefficient picked up at each node, and sums the
products per endpoint.  Exponential in the number of columns; intended
only as an independent test oracle for the matrix propagation.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .coins import ColumnSpec, coin_of, make_coin

__all__ = ["PathSumResult", "path_sum_amplitude", "path_sum_state", "DEFAULT_MAX_PATHS"]

Mode = Literal["up", "down"]

DEFAULT_MAX_PATHS = 2**20


@dataclass
class PathSumResult:
    """Endpoint amplitudes and boundary leaks of a full path enumeration."""

    up: np.ndarray
    down: np.ndarray
    leak_top: float
    leak_bottom: float


def _check(specs: Sequence[ColumnSpec], row: int, mode: str, max_paths: int) -> int:
    if not specs:
        raise ValueError("need at least one column")
    h = specs[0].height
    for s in specs:
        if s.height != h:
            raise ValueError("all columns must share one height")
    if 2 ** len(specs) > max_paths:
        raise ValueError(
            f"path count bound exceeded: 2^{len(specs)} paths > {max_paths}"
        )
    if not 0 <= row < h:
        raise ValueError(f"row {row} outside lattice of height {h}")
    if mode not in ("up", "down"):
        raise ValueError(f"mode must be 'up' or 'down', got {mode!r}")
    return h


def _node_matrix(spec: ColumnSpec, row: int) -> np.ndarray:
    return make_coin(coin_of(spec.kinds[row]))


def path_sum_state(
    specs: Sequence[ColumnSpec],
    source: tuple[int, Mode],
    max_paths: int = DEFAULT_MAX_PATHS,
) -> PathSumResult:
    """Sum over all paths from ``source`` through every column.

    Returns the endpoint amplitude grids plus the leak tallies.  Paths
    leaking at the same column and boundary add coherently before the
    probability is taken, matching the absorbing-boundary accounting of
    the column step.
    """
    row0, mode0 = source
    h = _check(specs, row0, mode0, max_paths)
    ncols = len(specs)
    final_up = np.zeros(h, dtype=np.complex128)
    final_down = np.zeros(h, dtype=np.complex128)
    leak_amp: dict[tuple[int, str], complex] = defaultdict(complex)

    # Explicit stack of (column, row, is_up, amplitude); zero-amplitude
    # branches are pruned (they contribute exactly nothing to any sum).
    stack = [(0, row0, mode0 == "up", 1.0 + 0.0j)]
    while stack:
        col, row, is_up, amp = stack.pop()
        if col == ncols:
            if is_up:
                final_up[row] += amp
            else:
                final_down[row] += amp
            continue
        u = _node_matrix(specs[col], row)
        if is_up:
            a_next = amp * u[0, 0]  # transmit up
            b_next = amp * u[1, 0]  # reflect down
        else:
            a_next = amp * u[0, 1]  # reflect up
            b_next = amp * u[1, 1]  # transmit down
        if a_next != 0.0:
            if row + 1 >= h:
                leak_amp[(col, "top")] += a_next
            else:
                stack.append((col + 1, row + 1, True, a_next))
        if b_next != 0.0:
            if row - 1 < 0:
                leak_amp[(col, "bottom")] += b_next
            else:
                stack.append((col + 1, row - 1, False, b_next))

    leak_top = sum(abs(v) ** 2 for (c, side), v in leak_amp.items() if side == "top")
    leak_bottom = sum(abs(v) ** 2 for (c, side), v in leak_amp.items() if side == "bottom")
    return PathSumResult(final_up, final_down, float(leak_top), float(leak_bottom))


def path_sum_amplitude(
    specs: Sequence[ColumnSpec],
    source: tuple[int, Mode],
    target: tuple[int, Mode],
    max_paths: int = DEFAULT_MAX_PATHS,
) -> complex:
    """Amplitude at ``target`` after all columns, summed over every path."""
    row_t, mode_t = target
    h = _check(specs, row_t, mode_t, max_paths)
    del h
    result = path_sum_state(specs, source, max_paths=max_paths)
    grid = result.up if mode_t == "up" else result.down
    return complex(grid[row_t])
