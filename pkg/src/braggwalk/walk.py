"""Single-column propagation with absorbing boundaries.

One step applies every node coin of a column and shifts the outputs: the
up-output of node m becomes the up-input of node m+1, the down-output the
down-input of node m-1.  Outputs shifted past the top or bottom row leave
the lattice for good; their probability is added to the state's leak
tallies so that remaining norm + leaks is conserved.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coins import ColumnSpec

__all__ = ["WalkState", "apply_column", "step_kernel"]


@dataclass
class WalkState:
    """Complex amplitude pair per node plus accumulated boundary leaks.

    ``up[m]`` / ``down[m]`` are the up-mover and down-mover inputs of node
    m (m = 0 is the bottom row).  ``leak_top`` / ``leak_bottom`` accumulate
    the probability absorbed at the boundaries.  When ``record_history``
    is set, the per-column leak increments are appended to
    ``history_top`` / ``history_bottom`` on every step.
    """

    up: np.ndarray
    down: np.ndarray
    leak_top: float = 0.0
    leak_bottom: float = 0.0
    record_history: bool = False
    history_top: list[float] = field(default_factory=list)
    history_bottom: list[float] = field(default_factory=list)

    def __post_init__(self):
        self.up = np.asarray(self.up, dtype=np.complex128)
        self.down = np.asarray(self.down, dtype=np.complex128)
        if self.up.ndim != 1 or self.up.shape != self.down.shape:
            raise ValueError("up/down must be 1-D arrays of equal length")
        if self.up.size < 1:
            raise ValueError("state height must be >= 1")
        if self.leak_top < 0.0 or self.leak_bottom < 0.0:
            raise ValueError("leak tallies must be non-negative")

    @property
    def height(self) -> int:
        return self.up.size

    @property
    def norm(self) -> float:
        """Probability still inside the lattice."""
        return float(np.vdot(self.up, self.up).real + np.vdot(self.down, self.down).real)

    @classmethod
    def zero(cls, height: int, **kwargs) -> "WalkState":
        return cls(
            up=np.zeros(height, dtype=np.complex128),
            down=np.zeros(height, dtype=np.complex128),
            **kwargs,
        )

    def copy(self) -> "WalkState":
        return WalkState(
            up=self.up.copy(),
            down=self.down.copy(),
            leak_top=self.leak_top,
            leak_bottom=self.leak_bottom,
            record_history=self.record_history,
            history_top=list(self.history_top),
            history_bottom=list(self.history_bottom),
        )


def step_kernel(
    up: np.ndarray,
    down: np.ndarray,
    coeffs: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray],
    out_up: np.ndarray,
    out_down: np.ndarray,
    scratch: np.ndarray,
) -> tuple[float, float]:
    """Advance one column into preallocated output buffers.

    ``out_up``/``out_down``/``scratch`` must be distinct complex arrays of
    the same length as the inputs and distinct from them (double-buffer
    discipline).  Returns the (top, bottom) leak increments.
    """
    ta, rb, ra, tb = coeffs
    # node outputs: o_up = ta*up + rb*down, o_down = ra*up + tb*down.
    # Write each shifted output directly into its destination rows.
    np.multiply(ta[:-1], up[:-1], out=out_up[1:])
    np.multiply(rb[:-1], down[:-1], out=scratch[1:])
    out_up[1:] += scratch[1:]
    out_up[0] = 0.0

    np.multiply(ra[1:], up[1:], out=out_down[:-1])
    np.multiply(tb[1:], down[1:], out=scratch[:-1])
    out_down[:-1] += scratch[:-1]
    out_down[-1] = 0.0

    o_top = ta[-1] * up[-1] + rb[-1] * down[-1]
    o_bot = ra[0] * up[0] + tb[0] * down[0]
    d_top = o_top.real * o_top.real + o_top.imag * o_top.imag
    d_bot = o_bot.real * o_bot.real + o_bot.imag * o_bot.imag
    return d_top, d_bot


def apply_column(state: WalkState, spec: ColumnSpec) -> WalkState:
    """Apply one lattice column and return the resulting state.

    The input state is left untouched.  Raises ValueError when the state
    height does not match the column height.
    """
    if state.height != spec.height:
        raise ValueError(
            f"state height {state.height} does not match column height {spec.height}"
        )
    h = state.height
    out_up = np.empty(h, dtype=np.complex128)
    out_down = np.empty(h, dtype=np.complex128)
    scratch = np.empty(h, dtype=np.complex128)
    d_top, d_bot = step_kernel(state.up, state.down, spec.coefficients(), out_up, out_down, scratch)
    new = WalkState(
        up=out_up,
        down=out_down,
        leak_top=state.leak_top + d_top,
        leak_bottom=state.leak_bottom + d_bot,
        record_history=state.record_history,
        history_top=list(state.history_top),
        history_bottom=list(state.history_bottom),
    )
    if new.record_history:
        new.history_top.append(d_top)
        new.history_bottom.append(d_bot)
    return new
