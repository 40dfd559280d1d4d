"""Quantum-random-walk simulator for a two-blade perfect-crystal neutron cavity.

The lattice propagates complex up/down amplitude pairs column by column;
crystal nodes mix them with a three-parameter coin, free-space nodes just
translate them, and flux crossing the outer surfaces is tallied as leaks.
Physical lengths are expressed in pendellösung units and mapped to lattice
layers through the resolution (layers per pendellösung length).
"""

from .analysis import (
    BeamProfile,
    FitResult,
    bounce_index,
    convolve_beam,
    fit_reflectivity,
    oscillation_period,
    penetration_profile,
    spectrum,
)
from .coins import FREE, ColumnSpec, CoinParams, Crystal, Free, NodeKind, make_coin
from .config import RunConfig
from .engine import RecordingOptions, SimulationRecord, run_simulation, sweep_gap
from .errors import (
    BraggWalkError,
    ConfigError,
    NumericsError,
    ResourceError,
    SweepError,
)
from .geometry import (
    CavityGeometry,
    LatticePlan,
    SourceSpec,
    build_lattice_plan,
    build_slab_plan,
    column_spec_at,
    initial_state,
)
from .pathsum import path_sum_amplitude, path_sum_state
from .physics import (
    CrystalConstants,
    Resolution,
    distance_per_layer,
    gamma_for,
    layers_for,
    pendellosung_length,
    si220_constants,
)
from .walk import WalkState, apply_column

__version__ = "0.1.0"

__all__ = [
    "BeamProfile",
    "BraggWalkError",
    "CavityGeometry",
    "CoinParams",
    "ColumnSpec",
    "ConfigError",
    "Crystal",
    "CrystalConstants",
    "FREE",
    "FitResult",
    "Free",
    "LatticePlan",
    "NodeKind",
    "NumericsError",
    "RecordingOptions",
    "Resolution",
    "ResourceError",
    "RunConfig",
    "SimulationRecord",
    "SourceSpec",
    "SweepError",
    "WalkState",
    "apply_column",
    "bounce_index",
    "build_lattice_plan",
    "build_slab_plan",
    "column_spec_at",
    "convolve_beam",
    "distance_per_layer",
    "fit_reflectivity",
    "gamma_for",
    "initial_state",
    "layers_for",
    "make_coin",
    "oscillation_period",
    "path_sum_amplitude",
    "path_sum_state",
    "pendellosung_length",
    "penetration_profile",
    "run_simulation",
    "si220_constants",
    "spectrum",
    "sweep_gap",
]
