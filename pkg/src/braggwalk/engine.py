"""Column loop over a lattice plan, with recording and gap sweeps.

A run is strictly sequential over columns (each column depends on the
previous one); sweep members are independent and may run in a process
pool.  The state is double-buffered: the step kernel writes into spare
arrays that are swapped in after each column.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import NumericsError, ResourceError, SweepError
from .geometry import (
    DEFAULT_MAX_NODES,
    CavityGeometry,
    LatticePlan,
    build_lattice_plan,
    column_spec_at,
    initial_state,
)
from .physics import Resolution
from .walk import WalkState, step_kernel

__all__ = [
    "RecordingOptions",
    "SimulationRecord",
    "run_simulation",
    "sweep_gap",
    "DEFAULT_MAX_BYTES",
]

DEFAULT_MAX_BYTES = 4 * 1024**3


@dataclass(frozen=True)
class RecordingOptions:
    """What a run keeps besides the final state.

    Map strides of None default to one sample per pendellösung length in
    that direction.  The surface trace needs a non-zero gap and is
    silently skipped otherwise.
    """

    map_column_stride: int | None = None
    map_row_stride: int | None = None
    record_map: bool = True
    record_surface_trace: bool = True
    record_exit_traces: bool = True

    def __post_init__(self):
        for name in ("map_column_stride", "map_row_stride"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ValueError(f"{name} must be >= 1, got {v}")

    def resolved_strides(self, resolution: Resolution) -> tuple[int, int]:
        n = resolution.layers_per_pendellosung
        cs = self.map_column_stride if self.map_column_stride is not None else n
        rs = self.map_row_stride if self.map_row_stride is not None else n
        return cs, rs


@dataclass
class SimulationRecord:
    """Everything a run keeps.

    ``intensity_map[i, j]`` is |up|^2 + |down|^2 at sampled column
    ``col_samples[i]`` and row ``row_samples[j]``.  ``exit_top`` /
    ``exit_bottom`` hold the per-column leak increments, ``confined`` the
    measured remaining norm after each column, and ``surface_trace`` the
    down-mover intensity at the gap row under the top blade.
    """

    plan: LatticePlan
    options: RecordingOptions
    intensity_map: np.ndarray | None
    col_samples: np.ndarray | None
    row_samples: np.ndarray | None
    exit_top: np.ndarray | None
    exit_bottom: np.ndarray | None
    confined: np.ndarray
    surface_trace: np.ndarray | None
    final_state: WalkState

    @property
    def final_confined(self) -> float:
        return float(self.confined[-1])

    @property
    def final_down_intensity(self) -> float:
        """Down-mode probability crossing the exit face."""
        s = self.final_state
        return float(np.vdot(s.down, s.down).real)

    @property
    def final_up_intensity(self) -> float:
        s = self.final_state
        return float(np.vdot(s.up, s.up).real)

    @property
    def column_spacing(self) -> float:
        """Pendellösung units per column."""
        return 1.0 / self.plan.resolution.layers_per_pendellosung


def _required_bytes(plan: LatticePlan, options: RecordingOptions) -> int:
    h, cols = plan.height, plan.columns
    state_bytes = 5 * h * 16  # two double-buffered mode arrays plus scratch
    trace_bytes = 8 * cols  # confined, always recorded
    if options.record_exit_traces:
        trace_bytes += 2 * 8 * cols
    if options.record_surface_trace and plan.rows_gap > 0:
        trace_bytes += 8 * cols
    map_bytes = 0
    if options.record_map:
        cs, rs = options.resolved_strides(plan.resolution)
        map_bytes = 8 * ((cols + cs - 1) // cs) * ((h + rs - 1) // rs)
    return state_bytes + trace_bytes + map_bytes


def run_simulation(
    plan: LatticePlan,
    options: RecordingOptions | None = None,
    max_bytes: int = DEFAULT_MAX_BYTES,
) -> SimulationRecord:
    """Propagate the plan's source through all columns of the plan.

    Deterministic for fixed inputs.  Raises ResourceError when the
    recording buffers would exceed ``max_bytes`` and NumericsError if a
    non-finite amplitude ever shows up (that is a bug, not bad input).
    """
    if options is None:
        options = RecordingOptions()
    required = _required_bytes(plan, options)
    if required > max_bytes:
        raise ResourceError(
            f"run of {plan.height} rows x {plan.columns} columns needs more than "
            f"the configured budget",
            required=required,
            budget=max_bytes,
        )

    h, cols = plan.height, plan.columns
    state = initial_state(plan)
    up, down = state.up, state.down
    buf_up = np.empty(h, dtype=np.complex128)
    buf_down = np.empty(h, dtype=np.complex128)
    scratch = np.empty(h, dtype=np.complex128)

    cs, rs = options.resolved_strides(plan.resolution)
    record_map = options.record_map
    col_samples = np.arange(0, cols, cs) if record_map else None
    row_samples = np.arange(0, h, rs) if record_map else None
    intensity_map = (
        np.empty((col_samples.size, row_samples.size)) if record_map else None
    )
    exit_top = np.empty(cols) if options.record_exit_traces else None
    exit_bottom = np.empty(cols) if options.record_exit_traces else None
    confined = np.empty(cols)
    srow = plan.surface_trace_row
    surface = (
        np.empty(cols) if (options.record_surface_trace and srow is not None) else None
    )

    leak_top = state.leak_top
    leak_bottom = state.leak_bottom
    map_i = 0
    for col in range(cols):
        spec = column_spec_at(plan, col)
        d_top, d_bot = step_kernel(
            up, down, spec.coefficients(), buf_up, buf_down, scratch
        )
        up, buf_up = buf_up, up
        down, buf_down = buf_down, down
        leak_top += d_top
        leak_bottom += d_bot
        norm = float(np.vdot(up, up).real + np.vdot(down, down).real)
        if not math.isfinite(norm):
            raise NumericsError(
                f"non-finite amplitude at column {col}; aborting (implementation bug)"
            )
        confined[col] = norm
        if exit_top is not None:
            exit_top[col] = d_top
            exit_bottom[col] = d_bot
        if surface is not None:
            v = down[srow]
            surface[col] = v.real * v.real + v.imag * v.imag
        if record_map and col % cs == 0:
            inten = np.abs(up[::rs]) ** 2
            inten += np.abs(down[::rs]) ** 2
            intensity_map[map_i] = inten
            map_i += 1

    final = WalkState(up=up, down=down, leak_top=leak_top, leak_bottom=leak_bottom)
    return SimulationRecord(
        plan=plan,
        options=options,
        intensity_map=intensity_map,
        col_samples=col_samples,
        row_samples=row_samples,
        exit_top=exit_top,
        exit_bottom=exit_bottom,
        confined=confined,
        surface_trace=surface,
        final_state=final,
    )


def _sweep_member(args) -> tuple[float, float]:
    base, gap, resolution, options, max_bytes, max_nodes = args
    geometry = CavityGeometry(
        blade_thickness_t=base.blade_thickness_t,
        gap_d=gap,
        length_l=base.length_l,
        coin=base.coin,
    )
    plan = build_lattice_plan(geometry, resolution, max_nodes=max_nodes)
    record = run_simulation(plan, options, max_bytes=max_bytes)
    return gap, record.final_confined


def sweep_gap(
    base: CavityGeometry,
    gap_values,
    resolution: Resolution,
    options: RecordingOptions | None = None,
    workers: int = 1,
    max_bytes: int = DEFAULT_MAX_BYTES,
    max_nodes: int | None = None,
) -> list[tuple[float, float]]:
    """One independent cavity run per gap value.

    Returns (gap, final confined intensity) pairs in input order.  Member
    runs are independent; with ``workers`` > 1 they execute in a process
    pool.  If any member fails, a SweepError carrying the per-gap error
    messages and the partial results is raised after all members finish.
    """
    if options is None:  # sweeps only need the confined trace
        options = RecordingOptions(
            record_map=False, record_surface_trace=False, record_exit_traces=False
        )
    if max_nodes is None:
        max_nodes = DEFAULT_MAX_NODES
    gaps = [float(g) for g in gap_values]
    jobs = [(base, g, resolution, options, max_bytes, max_nodes) for g in gaps]
    results: list[tuple[float, float]] = []
    failures: list[tuple[float, str]] = []
    if workers <= 1 or len(jobs) <= 1:
        for job in jobs:
            try:
                results.append(_sweep_member(job))
            except Exception as exc:  # noqa: BLE001 - reported per gap
                failures.append((job[1], str(exc)))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_sweep_member, job) for job in jobs]
            for job, fut in zip(jobs, futures):
                try:
                    results.append(fut.result())
                except Exception as exc:  # noqa: BLE001
                    failures.append((job[1], str(exc)))
    if failures:
        raise SweepError(failures=failures, partial=results)
    return results
