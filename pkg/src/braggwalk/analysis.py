"""Post-processing of simulation records.

Penetration profiles, bounce-indexed confinement traces, reflectivity
fits, spectra of positional traces, gap-sweep oscillation periods, and
beam-profile convolution of exit traces into detector predictions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from .engine import SimulationRecord
from .geometry import LatticePlan

__all__ = [
    "BeamProfile",
    "FitResult",
    "bounce_index",
    "column_for_bounce",
    "bounce_axis",
    "penetration_profile",
    "fit_reflectivity",
    "spectrum",
    "oscillation_period",
    "convolve_beam",
    "pair_sum",
    "peak_indices",
    "DEFAULT_PEAK_FRACTION",
]

# Peaks below this fraction of the tallest magnitude are ignored when
# counting spectral modes.
DEFAULT_PEAK_FRACTION = 0.2


@dataclass(frozen=True)
class BeamProfile:
    """Sampled exit-peak shape on a uniform position grid.

    ``weights`` are non-negative and normalized to unit sum on
    construction; ``spacing`` is the grid step in pendellösung units.
    """

    weights: np.ndarray
    spacing: float

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size < 1:
            raise ValueError("beam profile needs at least one sample")
        if not np.all(np.isfinite(w)):
            raise ValueError("beam profile weights must be finite")
        if np.any(w < 0.0):
            raise ValueError("beam profile weights must be non-negative")
        total = float(w.sum())
        if total <= 0.0:
            raise ValueError("beam profile must have positive total weight")
        if not self.spacing > 0.0:
            raise ValueError(f"spacing must be positive, got {self.spacing!r}")
        w = w / total
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def gaussian(cls, sigma: float, spacing: float, half_width_sigmas: float = 5.0) -> "BeamProfile":
        """Synthetic Gaussian profile truncated at +-half_width_sigmas."""
        if not sigma > 0.0:
            raise ValueError(f"sigma must be positive, got {sigma!r}")
        half = int(math.ceil(half_width_sigmas * sigma / spacing))
        x = np.arange(-half, half + 1) * spacing
        return cls(weights=np.exp(-0.5 * (x / sigma) ** 2), spacing=spacing)


@dataclass(frozen=True)
class FitResult:
    """Per-bounce reflectivity fit I(b) = i0 * r**b."""

    r: float
    i0: float
    residual: float

    def __post_init__(self):
        if not 0.0 < self.r <= 1.0:
            raise ValueError(f"reflectivity must lie in (0, 1], got {self.r!r}")
        if self.residual < 0.0:
            raise ValueError("residual must be non-negative")


def bounce_index(column: int, plan: LatticePlan) -> float:
    """Geometric bounce number of a column: one bounce per 2 x gap rows."""
    if plan.rows_gap == 0:
        raise ValueError("bounce index undefined for a plan without a gap")
    if column < 0:
        raise ValueError(f"column must be >= 0, got {column}")
    return column / plan.columns_per_bounce


def column_for_bounce(bounce: float, plan: LatticePlan) -> int:
    """First column at or past the given bounce number."""
    if plan.rows_gap == 0:
        raise ValueError("bounce index undefined for a plan without a gap")
    if bounce < 0:
        raise ValueError(f"bounce must be >= 0, got {bounce}")
    return int(math.ceil(bounce * plan.columns_per_bounce))


def bounce_axis(record: SimulationRecord) -> np.ndarray:
    """Bounce number after each column of the record's confined trace."""
    cols = np.arange(1, record.plan.columns + 1)
    return cols / record.plan.columns_per_bounce


def penetration_profile(
    record: SimulationRecord, start_bounce: float
) -> tuple[np.ndarray, np.ndarray]:
    """Mean intensity versus depth into the top blade.

    Averages the recorded intensity map over all sampled columns at or
    past ``start_bounce``.  Depth 0 is the blade's inner (gap-facing)
    surface; depths are in pendellösung units.  Returns (depths, means).
    """
    if record.intensity_map is None:
        raise ValueError("record has no intensity map")
    plan = record.plan
    start_col = column_for_bounce(start_bounce, plan)
    if start_col >= plan.columns:
        raise ValueError(
            f"start bounce {start_bounce:g} is past the end of the record "
            f"({bounce_index(plan.columns, plan):g} bounces)"
        )
    col_sel = record.col_samples >= start_col
    if not np.any(col_sel):
        raise ValueError("no sampled columns at or past the start bounce")
    inner = plan.top_blade_inner_row
    row_sel = record.row_samples >= inner
    rows = record.row_samples[row_sel]
    n = plan.resolution.layers_per_pendellosung
    depths = (rows - inner) / n
    means = record.intensity_map[np.ix_(col_sel, row_sel)].mean(axis=0)
    return depths, means


def fit_reflectivity(
    bounces: np.ndarray,
    intensities: np.ndarray,
    window: tuple[float, float],
    min_points: int = 10,
) -> FitResult:
    """Least-squares fit of I(b) = i0 * r**b over a bounce window.

    Fitted in log space with uniform weights; the residual is the RMS of
    the log-intensity misfit.  Rejects windows with fewer than
    ``min_points`` samples or non-positive intensities.
    """
    bounces = np.asarray(bounces, dtype=float)
    intensities = np.asarray(intensities, dtype=float)
    if bounces.shape != intensities.shape or bounces.ndim != 1:
        raise ValueError("bounces and intensities must be matching 1-D arrays")
    lo, hi = window
    if not lo < hi:
        raise ValueError(f"empty window {window!r}")
    sel = (bounces >= lo) & (bounces <= hi)
    if int(sel.sum()) < min_points:
        raise ValueError(
            f"window {window!r} holds {int(sel.sum())} points; need >= {min_points}"
        )
    y = intensities[sel]
    if np.any(y <= 0.0):
        raise ValueError("non-positive intensities in window; log fit undefined")
    x = bounces[sel]
    logy = np.log(y)
    design = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(design, logy, rcond=None)
    fit = design @ coef
    residual = float(np.sqrt(np.mean((logy - fit) ** 2)))
    r = float(np.exp(coef[1]))
    if r > 1.0:  # a (noisy) rising trace still means "no loss per bounce"
        r = 1.0
    return FitResult(r=r, i0=float(np.exp(coef[0])), residual=residual)


def spectrum(
    values: np.ndarray, spacing: float, min_samples: int = 16
) -> tuple[np.ndarray, np.ndarray]:
    """Magnitude spectrum of a uniformly sampled positional series.

    The series is mean-subtracted and Hann-tapered before the transform;
    frequencies are in cycles per pendellösung unit.  Returns
    (frequencies, magnitudes).
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 1:
        raise ValueError("series must be 1-D")
    if values.size < min_samples:
        raise ValueError(f"series of {values.size} samples; need >= {min_samples}")
    if not spacing > 0.0:
        raise ValueError(f"spacing must be positive, got {spacing!r}")
    x = values - values.mean()
    x = x * np.hanning(values.size)
    mags = np.abs(np.fft.rfft(x))
    freqs = np.fft.rfftfreq(values.size, d=spacing)
    return freqs, mags


def peak_indices(
    magnitudes: np.ndarray,
    fraction: float = DEFAULT_PEAK_FRACTION,
    min_separation: int = 1,
    skip_zero_bin: bool = True,
) -> np.ndarray:
    """Local maxima at or above ``fraction`` of the global maximum.

    ``min_separation`` is the minimum index distance between reported
    peaks; the zero-frequency bin is excluded by default (spectra are
    mean-subtracted, so anything there is numerical residue).
    """
    mags = np.asarray(magnitudes, dtype=float)
    if mags.ndim != 1 or mags.size < 3:
        raise ValueError("need a 1-D series of at least 3 samples")
    work = mags.copy()
    if skip_zero_bin:
        work[0] = 0.0
    top = float(work.max())
    if top <= 0.0:
        return np.array([], dtype=int)
    idx, _ = find_peaks(work, height=fraction * top, distance=max(1, min_separation))
    return idx


def oscillation_period(
    x: np.ndarray, y: np.ndarray, min_maxima: int = 3
) -> float:
    """Mean spacing of local maxima of y(x) on a uniform grid.

    Peak positions are refined by quadratic interpolation through each
    maximum and its neighbours.  Rejects series with fewer than
    ``min_maxima`` interior maxima or non-uniform sampling.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 5:
        raise ValueError("need matching 1-D arrays of at least 5 samples")
    steps = np.diff(x)
    if not np.allclose(steps, steps[0], rtol=1e-6, atol=0.0):
        raise ValueError("x grid must be uniform")
    dx = float(steps[0])
    idx, _ = find_peaks(y)
    if idx.size < min_maxima:
        raise ValueError(
            f"found {idx.size} local maxima; need >= {min_maxima} to estimate a period"
        )
    positions = []
    for i in idx:
        ym, y0, yp = y[i - 1], y[i], y[i + 1]
        denom = ym - 2.0 * y0 + yp
        offset = 0.0 if denom == 0.0 else 0.5 * (ym - yp) / denom
        positions.append(x[i] + offset * dx)
    return float(np.mean(np.diff(positions)))


def convolve_beam(trace: np.ndarray, spacing: float, profile: BeamProfile) -> np.ndarray:
    """Convolve an exit trace with a beam profile resampled to its grid.

    The profile is linearly interpolated onto the trace spacing and
    re-normalized, so the output has the trace's length and (away from
    the zero-padded edges) its integral.
    """
    trace = np.asarray(trace, dtype=float)
    if trace.ndim != 1 or trace.size < 1:
        raise ValueError("trace must be a non-empty 1-D array")
    if not spacing > 0.0:
        raise ValueError(f"spacing must be positive, got {spacing!r}")
    m = profile.weights.size
    half_extent = 0.5 * (m - 1) * profile.spacing
    src_x = np.linspace(-half_extent, half_extent, m)
    k = max(1, int(round(2.0 * half_extent / spacing)) + 1)
    dst_x = (np.arange(k) - (k - 1) / 2.0) * spacing
    kernel = np.interp(dst_x, src_x, profile.weights, left=0.0, right=0.0)
    total = kernel.sum()
    if total <= 0.0:  # profile narrower than one trace sample: identity
        kernel = np.array([1.0])
    else:
        kernel = kernel / total
    return np.convolve(trace, kernel, mode="same")


def pair_sum(trace: np.ndarray) -> np.ndarray:
    """Sum non-overlapping pairs of samples (halves the length).

    A point excitation conserves (row + column) parity, so single-row
    traces alternate with exact zeros; pair sums remove that sublattice
    comb.  The sample spacing doubles.
    """
    trace = np.asarray(trace, dtype=float)
    if trace.ndim != 1 or trace.size < 2:
        raise ValueError("need a 1-D trace of at least 2 samples")
    m = trace.size // 2 * 2
    return trace[:m].reshape(-1, 2).sum(axis=1)
