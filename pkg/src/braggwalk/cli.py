"""Command-line front end.

Subcommands: simulate, sweep, spectrum, fit, convolve.  Exit codes:
0 success, 2 config error, 3 resource budget exceeded, 4 runtime numeric
error.  Runs are deterministic; there is no seed.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import analysis, fileio
from .config import RunConfig
from .engine import run_simulation, sweep_gap
from .errors import ConfigError, NumericsError, ResourceError, SweepError
from .geometry import build_lattice_plan

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RESOURCE = 3
EXIT_NUMERIC = 4

__all__ = ["main"]


def _out_dir(args, config: RunConfig | None = None) -> Path:
    out = args.out
    if out is None and config is not None and config.output_directory is not None:
        out = config.output_directory
    if out is None:
        raise ConfigError("no output directory: pass --out or set [output] directory")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="ascii")


def _trace_positions(record) -> np.ndarray:
    return np.arange(1, record.plan.columns + 1) * record.column_spacing


def cmd_simulate(args) -> int:
    config = RunConfig.from_file(args.config)
    out = _out_dir(args, config)
    plan = build_lattice_plan(config.geometry(), config.resolution(), source=config.source())
    record = run_simulation(plan, config.recording())

    (out / "run_config.cfg").write_text(config.to_text(), encoding="ascii")
    pos = _trace_positions(record)
    cs, rs = record.options.resolved_strides(plan.resolution)

    if record.intensity_map is not None:
        fileio.write_grid(out / "intensity_map.txt", record.intensity_map.T, rs, cs)
        if config.ppm:
            fileio.write_ppm(out / "intensity_map.ppm", record.intensity_map.T, config.ppm_cap)
    if record.exit_top is not None:
        fileio.write_csv(
            out / "exit_top.csv",
            {"position": pos, "intensity": record.exit_top},
            ["position in pendellosung units; per-column probability leaked through the top surface"],
        )
        fileio.write_csv(
            out / "exit_bottom.csv",
            {"position": pos, "intensity": record.exit_bottom},
            ["position in pendellosung units; per-column probability leaked through the bottom surface"],
        )
    fileio.write_csv(
        out / "confined.csv",
        {"position": pos, "intensity": record.confined},
        ["position in pendellosung units; probability remaining inside the lattice"],
    )
    if record.surface_trace is not None:
        fileio.write_csv(
            out / "surface.csv",
            {"position": pos, "intensity": record.surface_trace},
            ["position in pendellosung units; down-mover intensity at the gap row under the top blade"],
        )

    summary: dict = {
        "height_rows": plan.height,
        "columns": plan.columns,
        "rows_top_blade": plan.rows_top_blade,
        "rows_gap": plan.rows_gap,
        "rows_bottom_blade": plan.rows_bottom_blade,
        "gamma": plan.coin.gamma,
        "final_confined": record.final_confined,
        "leak_top_total": record.final_state.leak_top,
        "leak_bottom_total": record.final_state.leak_bottom,
        "final_up_intensity": record.final_up_intensity,
        "final_down_intensity": record.final_down_intensity,
    }

    if config.reflectivity_window is not None:
        fit = analysis.fit_reflectivity(
            analysis.bounce_axis(record), record.confined, config.reflectivity_window
        )
        summary["reflectivity_fit"] = {
            "r": fit.r,
            "one_minus_r": 1.0 - fit.r,
            "i0": fit.i0,
            "residual": fit.residual,
            "window": list(config.reflectivity_window),
        }

    if config.penetration_start_bounce is not None:
        depths, means = analysis.penetration_profile(record, config.penetration_start_bounce)
        fileio.write_csv(
            out / "penetration.csv",
            {"depth": depths, "intensity": means},
            ["depth into the top blade in pendellosung units; mean intensity per row"],
        )

    if config.spectrum and record.surface_trace is not None:
        series = analysis.pair_sum(record.surface_trace)
        freqs, mags = analysis.spectrum(series, 2.0 * record.column_spacing)
        fileio.write_csv(
            out / "surface_spectrum.csv",
            {"frequency": freqs, "magnitude": mags},
            ["frequency in cycles per pendellosung unit"],
        )
        peaks = analysis.peak_indices(mags)
        summary["surface_spectrum_peaks"] = [
            {"frequency": float(freqs[i]), "magnitude": float(mags[i])} for i in peaks
        ]

    if config.beam_profile is not None and record.exit_top is not None:
        profile = fileio.read_beam_profile(Path(config.beam_profile))
        detector = analysis.convolve_beam(record.exit_top, record.column_spacing, profile)
        fileio.write_csv(
            out / "detector.csv",
            {"position": pos, "intensity": detector},
            ["position in pendellosung units; top exit trace convolved with the beam profile"],
        )

    _write_json(out / "summary.json", summary)
    return EXIT_OK


def _parse_gaps(spec: str) -> list[float]:
    spec = spec.strip()
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigError(f"gap range must be start:stop:step, got {spec!r}")
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError:
            raise ConfigError(f"bad gap range {spec!r}") from None
        if step <= 0.0 or stop < start:
            raise ConfigError(f"bad gap range {spec!r}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [start + i * step for i in range(count)]
    try:
        gaps = [float(p) for p in spec.split(",") if p.strip()]
    except ValueError:
        raise ConfigError(f"bad gap list {spec!r}") from None
    if not gaps:
        raise ConfigError("empty gap list")
    return gaps


def cmd_sweep(args) -> int:
    config = RunConfig.from_file(args.config)
    out = _out_dir(args, config)
    gaps = _parse_gaps(args.gaps)
    partial_error: SweepError | None = None
    try:
        results = sweep_gap(
            config.geometry(), gaps, config.resolution(), workers=args.workers
        )
    except SweepError as exc:
        results = exc.partial
        partial_error = exc

    if results:
        gs = np.array([g for g, _ in results])
        cs = np.array([c for _, c in results])
        fileio.write_csv(
            out / "sweep.csv",
            {"gap": gs, "confined": cs},
            ["gap in pendellosung units; final confined intensity"],
        )
    summary: dict = {"gaps_requested": gaps, "runs_completed": len(results)}
    if partial_error is not None:
        summary["failures"] = [
            {"gap": g, "error": msg} for g, msg in partial_error.failures
        ]
    if len(results) >= 5:
        try:
            period = analysis.oscillation_period(
                np.array([g for g, _ in results]), np.array([c for _, c in results])
            )
            summary["oscillation_period"] = period
        except ValueError as exc:
            summary["oscillation_period_error"] = str(exc)
    _write_json(out / "sweep_summary.json", summary)
    if partial_error is not None:
        print(f"error: {partial_error}", file=sys.stderr)
        return EXIT_CONFIG if not _is_resource(partial_error) else EXIT_RESOURCE
    return EXIT_OK


def _is_resource(exc: SweepError) -> bool:
    return any("budget" in msg for _, msg in exc.failures)


def cmd_spectrum(args) -> int:
    out = _out_dir(args)
    x, y = fileio.read_xy_file(Path(args.trace))
    if x.size >= 2:
        steps = np.diff(x)
        if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-6, atol=0.0):
            raise ConfigError("trace positions must form a uniform increasing grid",
                              location=str(args.trace))
        spacing = float(x[1] - x[0])
    else:
        spacing = 1.0
    freqs, mags = analysis.spectrum(y, spacing)
    fileio.write_csv(
        out / "spectrum.csv",
        {"frequency": freqs, "magnitude": mags},
        ["frequency in cycles per pendellosung unit"],
    )
    peaks = analysis.peak_indices(mags, fraction=args.peak_fraction)
    _write_json(
        out / "peaks.json",
        {
            "peak_fraction": args.peak_fraction,
            "peaks": [
                {"frequency": float(freqs[i]), "magnitude": float(mags[i])} for i in peaks
            ],
        },
    )
    return EXIT_OK


def cmd_fit(args) -> int:
    out = _out_dir(args)
    b, y = fileio.read_xy_file(Path(args.trace))
    fit = analysis.fit_reflectivity(b, y, (args.window[0], args.window[1]))
    _write_json(
        out / "fit.json",
        {
            "r": fit.r,
            "one_minus_r": 1.0 - fit.r,
            "i0": fit.i0,
            "residual": fit.residual,
            "window": list(args.window),
        },
    )
    return EXIT_OK


def cmd_convolve(args) -> int:
    out = _out_dir(args)
    x, y = fileio.read_xy_file(Path(args.trace))
    if x.size >= 2:
        spacing = float(x[1] - x[0])
        steps = np.diff(x)
        if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-6, atol=0.0):
            raise ConfigError("trace positions must form a uniform increasing grid",
                              location=str(args.trace))
    else:
        spacing = 1.0
    profile = fileio.read_beam_profile(Path(args.profile))
    detector = analysis.convolve_beam(y, spacing, profile)
    fileio.write_csv(
        out / "detector.csv",
        {"position": x, "intensity": detector},
        ["position in pendellosung units; trace convolved with the beam profile"],
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="braggwalk",
        description="Quantum-walk simulator for a two-blade perfect-crystal neutron cavity.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one cavity simulation from a config file")
    p.add_argument("--config", required=True, help="path to the run config")
    p.add_argument("--out", default=None, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run one simulation per gap value")
    p.add_argument("--config", required=True, help="path to the run config")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument(
        "--gaps", required=True,
        help="comma list '0.5,1,2' or range 'start:stop:step' in pendellosung units",
    )
    p.add_argument("--workers", type=int, default=1, help="parallel sweep workers")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("spectrum", help="magnitude spectrum of a two-column trace file")
    p.add_argument("--trace", required=True, help="two-column position/value file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument(
        "--peak-fraction", type=float, default=analysis.DEFAULT_PEAK_FRACTION,
        help="report peaks above this fraction of the tallest magnitude",
    )
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("fit", help="per-bounce reflectivity fit of a confined trace")
    p.add_argument("--trace", required=True, help="two-column bounce/intensity file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument(
        "--window", type=float, nargs=2, required=True, metavar=("LO", "HI"),
        help="bounce window for the fit",
    )
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("convolve", help="convolve a trace with a beam profile")
    p.add_argument("--trace", required=True, help="two-column position/value file")
    p.add_argument("--profile", required=True, help="two-column beam profile file")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_convolve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except NumericsError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
