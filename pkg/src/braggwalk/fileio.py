"""Text and image output formats, plus two-column input parsing.

Formats (all inspectable without plotting tools):

* grid file -- header line ``rows cols row_stride col_stride`` (four
  integers), then ``rows`` lines of ``cols`` ASCII floats, row-major,
  bottom lattice row first;
* PPM -- binary P6 false-colour rendering of a grid with a fixed
  black-violet-red-yellow-white colormap and a configurable intensity
  cap (values at or above the cap saturate);
* CSV -- comma-separated pairs preceded by ``#`` comment lines carrying
  units;
* two-column text -- position/value pairs, ``#`` comments, used for
  traces and beam profiles.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .analysis import BeamProfile
from .errors import ConfigError

__all__ = [
    "write_grid",
    "read_grid",
    "write_ppm",
    "write_csv",
    "read_xy_file",
    "read_beam_profile",
]


def write_grid(path: Path, grid: np.ndarray, row_stride: int, col_stride: int) -> None:
    """Write an intensity map sampled at the given strides.

    ``grid[i, j]`` is row sample i, column sample j.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 2:
        raise ValueError("grid must be 2-D")
    rows, cols = grid.shape
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{rows} {cols} {row_stride} {col_stride}\n")
        for i in range(rows):
            fh.write(" ".join(f"{v:.10e}" for v in grid[i]))
            fh.write("\n")


def read_grid(path: Path) -> tuple[np.ndarray, int, int]:
    """Read a grid file back; returns (grid, row_stride, col_stride)."""
    path = Path(path)
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().split()
        if len(header) != 4:
            raise ConfigError("grid header must be 'rows cols row_stride col_stride'",
                              location=f"{path}:1")
        try:
            rows, cols, rs, cs = (int(v) for v in header)
        except ValueError as exc:
            raise ConfigError(f"bad grid header: {exc}", location=f"{path}:1") from exc
        data = np.loadtxt(fh, dtype=float, ndmin=2)
    if data.shape != (rows, cols):
        raise ConfigError(
            f"grid body is {data.shape[0]}x{data.shape[1]}, header says {rows}x{cols}",
            location=f"{path}:1",
        )
    return data, rs, cs


# Colormap anchors (value in [0,1] -> RGB), linearly interpolated.
_COLOR_ANCHORS = np.array(
    [
        [0.00, 0, 0, 0],
        [0.25, 80, 0, 160],
        [0.50, 220, 40, 40],
        [0.75, 255, 200, 0],
        [1.00, 255, 255, 255],
    ],
    dtype=float,
)


def _colorize(values: np.ndarray) -> np.ndarray:
    """Map values in [0, 1] to uint8 RGB via the fixed anchor table."""
    x = np.clip(values, 0.0, 1.0)
    stops = _COLOR_ANCHORS[:, 0]
    rgb = np.empty(x.shape + (3,), dtype=np.uint8)
    for c in range(3):
        rgb[..., c] = np.interp(x, stops, _COLOR_ANCHORS[:, c + 1]).astype(np.uint8)
    return rgb


def write_ppm(path: Path, grid: np.ndarray, cap: float) -> None:
    """Render a grid to binary PPM, top lattice row first.

    ``cap`` is the intensity mapped to the top of the colour range;
    everything above it saturates (the map is dominated by the initial
    transient otherwise).
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 2:
        raise ValueError("grid must be 2-D")
    if not cap > 0.0:
        raise ValueError(f"intensity cap must be positive, got {cap!r}")
    rgb = _colorize(grid[::-1, :] / cap)  # flip so the top blade renders on top
    height, width = grid.shape
    with open(path, "wb") as fh:
        fh.write(f"P6 {width} {height} 255\n".encode("ascii"))
        fh.write(rgb.tobytes())


def write_csv(path: Path, columns: dict[str, np.ndarray], comments: list[str]) -> None:
    """Write named columns as CSV with '#' comment lines carrying units."""
    names = list(columns)
    arrays = [np.asarray(columns[k]) for k in names]
    length = arrays[0].size
    for a in arrays:
        if a.size != length:
            raise ValueError("all CSV columns must have equal length")
    with open(path, "w", encoding="ascii") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write("# " + ",".join(names) + "\n")
        for i in range(length):
            fh.write(",".join(f"{a[i]:.17g}" for a in arrays))
            fh.write("\n")


def read_xy_file(path: Path) -> tuple[np.ndarray, np.ndarray]:
    """Parse a two-column text file (whitespace or comma separated).

    '#'-prefixed lines and blank lines are skipped.  Raises ConfigError
    with the file:line location on the first malformed row.
    """
    path = Path(path)
    xs: list[float] = []
    ys: list[float] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.replace(",", " ").split()
            if len(parts) != 2:
                raise ConfigError(
                    f"expected two columns, got {len(parts)}",
                    location=f"{path}:{lineno}",
                )
            try:
                x, y = float(parts[0]), float(parts[1])
            except ValueError as exc:
                raise ConfigError(str(exc), location=f"{path}:{lineno}") from exc
            xs.append(x)
            ys.append(y)
    if not xs:
        raise ConfigError("file holds no data rows", location=f"{path}:1")
    return np.asarray(xs), np.asarray(ys)


def read_beam_profile(path: Path) -> BeamProfile:
    """Load a beam profile file: two columns (position, weight).

    Positions must form a uniform grid; weights are validated and
    normalized by BeamProfile.
    """
    path = Path(path)
    x, w = read_xy_file(path)
    if x.size == 1:
        return BeamProfile(weights=w, spacing=1.0)
    steps = np.diff(x)
    if np.any(steps <= 0.0):
        raise ConfigError("positions must be strictly increasing", location=str(path))
    if not np.allclose(steps, steps[0], rtol=1e-6, atol=0.0):
        raise ConfigError("positions must form a uniform grid", location=str(path))
    try:
        return BeamProfile(weights=w, spacing=float(steps[0]))
    except ValueError as exc:
        raise ConfigError(str(exc), location=str(path)) from exc
