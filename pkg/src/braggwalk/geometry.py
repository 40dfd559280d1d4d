"""Lattice plans for the two-blade cavity and its single-slab limit.

All lengths are expressed in pendellösung units; one unit maps to
``layers_per_pendellosung`` rows or columns (the walk advances one row
per layer, so the two spacings are equal).  Row 0 is the bottom of the
lattice: bottom blade lowest, gap in the middle, top blade highest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np

from .coins import FREE, ColumnSpec, CoinParams, Crystal
from .errors import ResourceError
from .physics import Resolution, gamma_for
from .walk import WalkState

__all__ = [
    "CavityGeometry",
    "SourceSpec",
    "LatticePlan",
    "build_lattice_plan",
    "build_slab_plan",
    "column_spec_at",
    "initial_state",
    "DEFAULT_MAX_NODES",
]

# Generous lattice-size guard: the flagship cavity run is ~1.8e9 nodes.
DEFAULT_MAX_NODES = 20_000_000_000


@dataclass(frozen=True)
class CavityGeometry:
    """Two-blade cavity: blade thickness, gap and length in pendellösung units.

    ``coin`` optionally fixes the crystal-node coin; when None the plan
    derives gamma from the resolution with zero phases.
    """

    blade_thickness_t: float
    gap_d: float
    length_l: float
    coin: CoinParams | None = None

    def __post_init__(self):
        if not (self.blade_thickness_t > 0.0 and math.isfinite(self.blade_thickness_t)):
            raise ValueError(
                f"blade_thickness_t must be positive, got {self.blade_thickness_t!r}"
            )
        if not (self.length_l > 0.0 and math.isfinite(self.length_l)):
            raise ValueError(f"length_l must be positive, got {self.length_l!r}")
        if not (self.gap_d >= 0.0 and math.isfinite(self.gap_d)):
            raise ValueError(f"gap_d must be non-negative, got {self.gap_d!r}")


@dataclass(frozen=True)
class SourceSpec:
    """Initial excitation.

    A point source by default: unit amplitude in one mode at one row of
    the first column.  ``sigma_rows`` widens it into a Gaussian amplitude
    profile over rows (truncated at 4 sigma), and ``tilt`` applies a
    linear phase exp(i * tilt * row) -- a transverse momentum offset.
    The amplitude vector is normalized to unit total probability either
    way.
    """

    row: int
    mode: Literal["up", "down"] = "up"
    amplitude: complex = 1.0 + 0.0j
    sigma_rows: float | None = None
    tilt: float = 0.0

    def __post_init__(self):
        if self.row < 0:
            raise ValueError(f"source row must be >= 0, got {self.row}")
        if self.mode not in ("up", "down"):
            raise ValueError(f"source mode must be 'up' or 'down', got {self.mode!r}")
        if abs(self.amplitude) == 0.0 or not math.isfinite(abs(self.amplitude)):
            raise ValueError("source amplitude must be finite and non-zero")
        if self.sigma_rows is not None and not self.sigma_rows > 0.0:
            raise ValueError(f"sigma_rows must be positive, got {self.sigma_rows!r}")
        if not math.isfinite(self.tilt):
            raise ValueError(f"tilt must be finite, got {self.tilt!r}")


@dataclass(frozen=True)
class LatticePlan:
    """Realized lattice: band row counts, column count, source, resolution."""

    rows_top_blade: int
    rows_gap: int
    rows_bottom_blade: int
    columns: int
    source: SourceSpec
    resolution: Resolution
    coin: CoinParams

    def __post_init__(self):
        if min(self.rows_top_blade, self.rows_gap, self.rows_bottom_blade) < 0:
            raise ValueError("row counts must be non-negative")
        if self.height < 1:
            raise ValueError("plan height must be >= 1")
        if self.columns < 1:
            raise ValueError(f"column count must be >= 1, got {self.columns}")
        if self.source.row >= self.height:
            raise ValueError(
                f"source row {self.source.row} outside lattice of height {self.height}"
            )

    @property
    def height(self) -> int:
        return self.rows_top_blade + self.rows_gap + self.rows_bottom_blade

    @property
    def top_blade_inner_row(self) -> int:
        """Lowest row of the top blade (its gap-facing surface)."""
        return self.rows_bottom_blade + self.rows_gap

    @property
    def surface_trace_row(self) -> int | None:
        """Gap row adjacent to the top blade's inner face, if a gap exists."""
        if self.rows_gap == 0:
            return None
        return self.top_blade_inner_row - 1

    @property
    def columns_per_bounce(self) -> int:
        """Columns per geometric bounce: one down- plus one up-crossing of the gap."""
        return 2 * self.rows_gap

    def with_source(self, source: SourceSpec) -> "LatticePlan":
        return replace(self, source=source)


def _check_node_budget(height: int, columns: int, max_nodes: int) -> None:
    nodes = height * columns
    if nodes > max_nodes:
        raise ResourceError(
            f"lattice of {height} rows x {columns} columns exceeds the node budget",
            required=nodes,
            budget=max_nodes,
        )


def build_lattice_plan(
    geometry: CavityGeometry,
    resolution: Resolution,
    source: SourceSpec | None = None,
    max_nodes: int = DEFAULT_MAX_NODES,
) -> LatticePlan:
    """Realize a cavity geometry on the lattice.

    Row and column counts round to the nearest layer.  The default source
    is an up-mover at the top blade's inner surface in the first column,
    so the excitation immediately enters the blade and the reflected
    remainder starts bouncing across the gap.
    """
    n = resolution.layers_per_pendellosung
    rows_blade = round(geometry.blade_thickness_t * n)
    rows_gap = round(geometry.gap_d * n)
    columns = round(geometry.length_l * n)
    if rows_blade < 1:
        raise ValueError(
            f"blade thickness {geometry.blade_thickness_t:g} rounds to zero rows "
            f"at {n} layers per pendellösung length"
        )
    if columns < 1:
        raise ValueError(
            f"length {geometry.length_l:g} rounds to zero columns at {n} layers "
            f"per pendellösung length"
        )
    _check_node_budget(2 * rows_blade + rows_gap, columns, max_nodes)
    coin = geometry.coin if geometry.coin is not None else CoinParams(gamma_for(1.0, n))
    if source is None:
        source = SourceSpec(row=rows_blade + rows_gap, mode="up")
    return LatticePlan(
        rows_top_blade=rows_blade,
        rows_gap=rows_gap,
        rows_bottom_blade=rows_blade,
        columns=columns,
        source=source,
        resolution=resolution,
        coin=coin,
    )


def build_slab_plan(
    thickness: float,
    length: float,
    resolution: Resolution,
    source: SourceSpec | None = None,
    coin: CoinParams | None = None,
    max_nodes: int = DEFAULT_MAX_NODES,
) -> LatticePlan:
    """Single uniform crystal slab (the gap -> 0 limit written directly).

    The slab occupies the whole height; the default source is an up-mover
    at the bottom row, the natural entry point of a transmission-geometry
    beam.
    """
    if not thickness > 0.0:
        raise ValueError(f"thickness must be positive, got {thickness!r}")
    if not length > 0.0:
        raise ValueError(f"length must be positive, got {length!r}")
    n = resolution.layers_per_pendellosung
    rows = round(thickness * n)
    columns = round(length * n)
    if rows < 1 or columns < 1:
        raise ValueError("slab rounds to an empty lattice at this resolution")
    _check_node_budget(rows, columns, max_nodes)
    if coin is None:
        coin = CoinParams(gamma_for(1.0, n))
    if source is None:
        source = SourceSpec(row=0, mode="up")
    return LatticePlan(
        rows_top_blade=rows,
        rows_gap=0,
        rows_bottom_blade=0,
        columns=columns,
        source=source,
        resolution=resolution,
        coin=coin,
    )


def column_spec_at(plan: LatticePlan, column: int) -> ColumnSpec:
    """Node layout of one column: crystal in the blade bands, free in the gap.

    The cavity is uniform along its length, so every column shares one
    cached ColumnSpec; the per-column signature leaves room for future
    geometries.
    """
    if not 0 <= column < plan.columns:
        raise ValueError(f"column {column} outside plan with {plan.columns} columns")
    cached = getattr(plan, "_column_spec", None)
    if cached is None:
        crystal = Crystal(plan.coin)
        kinds = (
            (crystal,) * plan.rows_bottom_blade
            + (FREE,) * plan.rows_gap
            + (crystal,) * plan.rows_top_blade
        )
        cached = ColumnSpec(kinds)
        object.__setattr__(plan, "_column_spec", cached)
    return cached


def initial_state(plan: LatticePlan, record_history: bool = False) -> WalkState:
    """Build the walk state described by the plan's source."""
    src = plan.source
    h = plan.height
    state = WalkState.zero(h, record_history=record_history)
    target = state.up if src.mode == "up" else state.down
    if src.sigma_rows is None:
        target[src.row] = src.amplitude
    else:
        rows = np.arange(h)
        lo = max(0, int(math.floor(src.row - 4.0 * src.sigma_rows)))
        hi = min(h - 1, int(math.ceil(src.row + 4.0 * src.sigma_rows)))
        amp = np.zeros(h, dtype=np.complex128)
        window = slice(lo, hi + 1)
        amp[window] = np.exp(-0.25 * ((rows[window] - src.row) / src.sigma_rows) ** 2)
        amp[window] *= np.exp(1j * src.tilt * rows[window])
        # total probability equals |amplitude|^2, as for the point source
        amp *= src.amplitude / math.sqrt(float(np.vdot(amp, amp).real))
        target[:] = amp
    return state
