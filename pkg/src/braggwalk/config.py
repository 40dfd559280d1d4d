"""Run configuration: flat key-value text with sections.

The format is INI-like -- ``[section]`` headers, ``key = value`` lines,
``#`` or ``;`` comments -- parsed by hand so every validation error can
point at its file:line.  Unknown sections or keys are rejected.  The full
schema is documented in the README and mirrored by ``RunConfig.to_text``,
which echoes a config that re-parses to an identical RunConfig.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from .coins import CoinParams
from .engine import RecordingOptions
from .errors import ConfigError
from .geometry import CavityGeometry, SourceSpec
from .physics import Resolution, gamma_for

__all__ = ["RunConfig", "parse_entries", "DEFAULT_PPM_CAP"]

DEFAULT_PPM_CAP = 1.0e-3


@dataclass(frozen=True)
class _Entry:
    section: str
    key: str
    value: str
    line: int


def parse_entries(text: str, origin: str = "<config>") -> list[_Entry]:
    """Tokenize config text into (section, key, value, line) entries."""
    entries: list[_Entry] = []
    section = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith(";"):
            continue
        if line.startswith("["):
            if not line.endswith("]") or len(line) < 3:
                raise ConfigError("malformed section header", f"{origin}:{lineno}")
            section = line[1:-1].strip().lower()
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", f"{origin}:{lineno}")
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.split("#", 1)[0].strip()
        if not key:
            raise ConfigError("empty key", f"{origin}:{lineno}")
        if not section:
            raise ConfigError(f"key {key!r} appears before any [section]", f"{origin}:{lineno}")
        entries.append(_Entry(section, key, value, lineno))
    return entries


_SCHEMA: dict[str, set[str]] = {
    "geometry": {"blade_thickness", "gap", "length"},
    "resolution": {"layers_per_pendellosung"},
    "coin": {"xi", "zeta"},
    "source": {"row", "mode", "sigma", "tilt"},
    "recording": {"map", "map_column_stride", "map_row_stride", "surface_trace", "exit_traces"},
    "output": {"directory", "ppm", "ppm_cap"},
    "analysis": {"penetration_start_bounce", "reflectivity_window", "spectrum", "beam_profile"},
}


def _parse_float(entry: _Entry, origin: str) -> float:
    try:
        v = float(entry.value)
    except ValueError:
        raise ConfigError(
            f"{entry.section}.{entry.key}: not a number: {entry.value!r}",
            f"{origin}:{entry.line}",
        ) from None
    if not math.isfinite(v):
        raise ConfigError(
            f"{entry.section}.{entry.key}: must be finite", f"{origin}:{entry.line}"
        )
    return v


def _parse_int(entry: _Entry, origin: str) -> int:
    try:
        return int(entry.value)
    except ValueError:
        raise ConfigError(
            f"{entry.section}.{entry.key}: not an integer: {entry.value!r}",
            f"{origin}:{entry.line}",
        ) from None


def _parse_bool(entry: _Entry, origin: str) -> bool:
    v = entry.value.lower()
    if v in ("true", "yes", "on", "1"):
        return True
    if v in ("false", "no", "off", "0"):
        return False
    raise ConfigError(
        f"{entry.section}.{entry.key}: not a boolean: {entry.value!r}",
        f"{origin}:{entry.line}",
    )


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration (lengths in pendellösung units)."""

    blade_thickness: float
    gap: float
    length: float
    layers_per_pendellosung: int = 20
    xi: float = 0.0
    zeta: float = 0.0
    source_row: int | None = None
    source_mode: str = "up"
    source_sigma: float | None = None
    source_tilt: float = 0.0
    record_map: bool = True
    map_column_stride: int | None = None
    map_row_stride: int | None = None
    record_surface_trace: bool = True
    record_exit_traces: bool = True
    output_directory: str | None = None
    ppm: bool = False
    ppm_cap: float = DEFAULT_PPM_CAP
    penetration_start_bounce: float | None = None
    reflectivity_window: tuple[float, float] | None = None
    spectrum: bool = False
    beam_profile: str | None = None

    @classmethod
    def from_text(cls, text: str, origin: str = "<config>") -> "RunConfig":
        entries = parse_entries(text, origin)
        seen: dict[tuple[str, str], _Entry] = {}
        for e in entries:
            if e.section not in _SCHEMA:
                raise ConfigError(f"unknown section [{e.section}]", f"{origin}:{e.line}")
            if e.key not in _SCHEMA[e.section]:
                raise ConfigError(
                    f"unknown key {e.key!r} in [{e.section}]", f"{origin}:{e.line}"
                )
            if (e.section, e.key) in seen:
                raise ConfigError(
                    f"duplicate key {e.key!r} in [{e.section}]", f"{origin}:{e.line}"
                )
            seen[(e.section, e.key)] = e

        def get(section: str, key: str) -> _Entry | None:
            return seen.get((section, key))

        def require(section: str, key: str) -> _Entry:
            e = get(section, key)
            if e is None:
                raise ConfigError(f"missing required key {key!r} in [{section}]", origin)
            return e

        kwargs: dict = {}

        e = require("geometry", "blade_thickness")
        v = _parse_float(e, origin)
        if v <= 0.0:
            raise ConfigError("geometry.blade_thickness: must be > 0", f"{origin}:{e.line}")
        kwargs["blade_thickness"] = v

        e = require("geometry", "gap")
        v = _parse_float(e, origin)
        if v < 0.0:
            raise ConfigError("geometry.gap: must be >= 0", f"{origin}:{e.line}")
        kwargs["gap"] = v

        e = require("geometry", "length")
        v = _parse_float(e, origin)
        if v <= 0.0:
            raise ConfigError("geometry.length: must be > 0", f"{origin}:{e.line}")
        kwargs["length"] = v

        if (e := get("resolution", "layers_per_pendellosung")) is not None:
            n = _parse_int(e, origin)
            if n < 4:
                raise ConfigError(
                    "resolution.layers_per_pendellosung: must be >= 4",
                    f"{origin}:{e.line}",
                )
            kwargs["layers_per_pendellosung"] = n

        for key in ("xi", "zeta"):
            if (e := get("coin", key)) is not None:
                kwargs[key] = _parse_float(e, origin)

        if (e := get("source", "row")) is not None:
            v = _parse_int(e, origin)
            if v < 0:
                raise ConfigError("source.row: must be >= 0", f"{origin}:{e.line}")
            kwargs["source_row"] = v
        if (e := get("source", "mode")) is not None:
            if e.value not in ("up", "down"):
                raise ConfigError(
                    f"source.mode: must be 'up' or 'down', got {e.value!r}",
                    f"{origin}:{e.line}",
                )
            kwargs["source_mode"] = e.value
        if (e := get("source", "sigma")) is not None:
            v = _parse_float(e, origin)
            if v <= 0.0:
                raise ConfigError("source.sigma: must be > 0", f"{origin}:{e.line}")
            kwargs["source_sigma"] = v
        if (e := get("source", "tilt")) is not None:
            kwargs["source_tilt"] = _parse_float(e, origin)
        if "source_row" not in kwargs and (
            "source_sigma" in kwargs or "source_tilt" in kwargs or "source_mode" in kwargs
        ):
            raise ConfigError("[source] section needs a 'row' key", origin)

        if (e := get("recording", "map")) is not None:
            kwargs["record_map"] = _parse_bool(e, origin)
        for key, name in (
            ("map_column_stride", "map_column_stride"),
            ("map_row_stride", "map_row_stride"),
        ):
            if (e := get("recording", key)) is not None:
                v = _parse_int(e, origin)
                if v < 1:
                    raise ConfigError(f"recording.{key}: must be >= 1", f"{origin}:{e.line}")
                kwargs[name] = v
        if (e := get("recording", "surface_trace")) is not None:
            kwargs["record_surface_trace"] = _parse_bool(e, origin)
        if (e := get("recording", "exit_traces")) is not None:
            kwargs["record_exit_traces"] = _parse_bool(e, origin)

        if (e := get("output", "directory")) is not None:
            kwargs["output_directory"] = e.value
        if (e := get("output", "ppm")) is not None:
            kwargs["ppm"] = _parse_bool(e, origin)
        if (e := get("output", "ppm_cap")) is not None:
            v = _parse_float(e, origin)
            if v <= 0.0:
                raise ConfigError("output.ppm_cap: must be > 0", f"{origin}:{e.line}")
            kwargs["ppm_cap"] = v

        if (e := get("analysis", "penetration_start_bounce")) is not None:
            v = _parse_float(e, origin)
            if v < 0.0:
                raise ConfigError(
                    "analysis.penetration_start_bounce: must be >= 0", f"{origin}:{e.line}"
                )
            kwargs["penetration_start_bounce"] = v
        if (e := get("analysis", "reflectivity_window")) is not None:
            parts = e.value.split()
            if len(parts) != 2:
                raise ConfigError(
                    "analysis.reflectivity_window: expected two numbers 'lo hi'",
                    f"{origin}:{e.line}",
                )
            try:
                lo, hi = float(parts[0]), float(parts[1])
            except ValueError:
                raise ConfigError(
                    "analysis.reflectivity_window: expected two numbers 'lo hi'",
                    f"{origin}:{e.line}",
                ) from None
            if not lo < hi:
                raise ConfigError(
                    "analysis.reflectivity_window: lo must be < hi", f"{origin}:{e.line}"
                )
            kwargs["reflectivity_window"] = (lo, hi)
        if (e := get("analysis", "spectrum")) is not None:
            kwargs["spectrum"] = _parse_bool(e, origin)
        if (e := get("analysis", "beam_profile")) is not None:
            kwargs["beam_profile"] = e.value

        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: Path) -> "RunConfig":
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        return cls.from_text(text, origin=str(path))

    def to_text(self) -> str:
        """Echo the effective configuration; re-parses to an equal RunConfig."""
        lines = [
            "[geometry]",
            f"blade_thickness = {self.blade_thickness!r}",
            f"gap = {self.gap!r}",
            f"length = {self.length!r}",
            "",
            "[resolution]",
            f"layers_per_pendellosung = {self.layers_per_pendellosung}",
            "",
            "[coin]",
            f"xi = {self.xi!r}",
            f"zeta = {self.zeta!r}",
        ]
        if self.source_row is not None:
            lines += ["", "[source]", f"row = {self.source_row}", f"mode = {self.source_mode}"]
            if self.source_sigma is not None:
                lines.append(f"sigma = {self.source_sigma!r}")
            if self.source_tilt != 0.0:
                lines.append(f"tilt = {self.source_tilt!r}")
        lines += [
            "",
            "[recording]",
            f"map = {str(self.record_map).lower()}",
        ]
        if self.map_column_stride is not None:
            lines.append(f"map_column_stride = {self.map_column_stride}")
        if self.map_row_stride is not None:
            lines.append(f"map_row_stride = {self.map_row_stride}")
        lines += [
            f"surface_trace = {str(self.record_surface_trace).lower()}",
            f"exit_traces = {str(self.record_exit_traces).lower()}",
            "",
            "[output]",
        ]
        if self.output_directory is not None:
            lines.append(f"directory = {self.output_directory}")
        lines += [
            f"ppm = {str(self.ppm).lower()}",
            f"ppm_cap = {self.ppm_cap!r}",
            "",
            "[analysis]",
        ]
        if self.penetration_start_bounce is not None:
            lines.append(f"penetration_start_bounce = {self.penetration_start_bounce!r}")
        if self.reflectivity_window is not None:
            lo, hi = self.reflectivity_window
            lines.append(f"reflectivity_window = {lo!r} {hi!r}")
        lines.append(f"spectrum = {str(self.spectrum).lower()}")
        if self.beam_profile is not None:
            lines.append(f"beam_profile = {self.beam_profile}")
        return "\n".join(lines) + "\n"

    # -- conversion to engine inputs ------------------------------------

    def resolution(self) -> Resolution:
        return Resolution(self.layers_per_pendellosung)

    def coin(self) -> CoinParams:
        gamma = gamma_for(1.0, self.layers_per_pendellosung)
        return CoinParams(gamma=gamma, xi=self.xi, zeta=self.zeta)

    def geometry(self) -> CavityGeometry:
        return CavityGeometry(
            blade_thickness_t=self.blade_thickness,
            gap_d=self.gap,
            length_l=self.length,
            coin=self.coin(),
        )

    def source(self) -> SourceSpec | None:
        if self.source_row is None:
            return None
        sigma_rows = (
            None
            if self.source_sigma is None
            else self.source_sigma * self.layers_per_pendellosung
        )
        return SourceSpec(
            row=self.source_row,
            mode=self.source_mode,
            sigma_rows=sigma_rows,
            tilt=self.source_tilt,
        )

    def recording(self) -> RecordingOptions:
        return RecordingOptions(
            map_column_stride=self.map_column_stride,
            map_row_stride=self.map_row_stride,
            record_map=self.record_map,
            record_surface_trace=self.record_surface_trace,
            record_exit_traces=self.record_exit_traces,
        )
