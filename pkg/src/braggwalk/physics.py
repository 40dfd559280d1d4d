"""Mapping between physical crystal/beam parameters and lattice parameters.

The pendellösung length sets the model's length unit; the coin angle per
lattice layer follows from how many layers resolve one pendellösung
period.  One full intensity-exchange cycle corresponds to a coin rotation
of pi, so a distance d (in pendellösung units) maps to n layers with
n * gamma = pi * d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "CrystalConstants",
    "Resolution",
    "pendellosung_length",
    "gamma_for",
    "layers_for",
    "distance_per_layer",
    "SI220_STRUCTURE_FACTOR_FM",
    "si220_constants",
]


@dataclass(frozen=True)
class CrystalConstants:
    """Crystal/beam constants entering the pendellösung length.

    v_cell in nm^3, wavelength in nm, Bragg angle in radians, structure
    factor magnitude (Debye-Waller corrected) in fm.
    """

    v_cell: float
    wavelength: float
    theta_b: float
    f_h: float

    def __post_init__(self):
        if not (self.v_cell > 0.0 and math.isfinite(self.v_cell)):
            raise ValueError(f"v_cell must be positive, got {self.v_cell!r}")
        if not (self.wavelength > 0.0 and math.isfinite(self.wavelength)):
            raise ValueError(f"wavelength must be positive, got {self.wavelength!r}")
        if not 0.0 < self.theta_b < math.pi / 2.0:
            raise ValueError(f"theta_b must lie in (0, pi/2), got {self.theta_b!r}")
        if not (self.f_h > 0.0 and math.isfinite(self.f_h)):
            raise ValueError(f"f_h must be positive, got {self.f_h!r}")


@dataclass(frozen=True)
class Resolution:
    """Lattice resolution: layers (and rows) per pendellösung length."""

    layers_per_pendellosung: int

    def __post_init__(self):
        n = self.layers_per_pendellosung
        if not isinstance(n, int):
            raise TypeError("layers_per_pendellosung must be an integer")
        if n < 4:
            raise ValueError(
                f"need at least 4 layers per pendellösung length to resolve one "
                f"oscillation, got {n}"
            )

    @property
    def gamma(self) -> float:
        """Coin angle per layer at this resolution."""
        return gamma_for(1.0, self.layers_per_pendellosung)


def pendellosung_length(constants: CrystalConstants) -> float:
    """Pendellösung length in micrometres.

    pi * V_cell * cos(theta_B) / (wavelength * |F_H|), with V_cell in
    nm^3, wavelength in nm and F_H in fm; the nm^2/fm result equals
    1000 um.
    """
    ratio = (
        math.pi
        * constants.v_cell
        * math.cos(constants.theta_b)
        / (constants.wavelength * constants.f_h)
    )
    return ratio * 1.0e3


def gamma_for(d: float, n: int) -> float:
    """Coin angle such that n layers span a distance of d pendellösung units.

    A full intensity-exchange cycle per pendellösung length requires a
    coin rotation of pi per unit distance: gamma = pi * d / n.  Distances
    beyond half a unit per layer cannot be resolved (gamma would exceed
    pi/2) and are rejected.
    """
    if n < 1:
        raise ValueError(f"layer count must be >= 1, got {n}")
    if d < 0.0:
        raise ValueError(f"distance must be >= 0, got {d}")
    gamma = math.pi * d / n
    if gamma > math.pi / 2.0:
        raise ValueError(
            f"under-resolved: d={d:g} over {n} layers needs gamma={gamma:g} > pi/2; "
            f"use at least {math.ceil(2.0 * d)} layers"
        )
    return gamma


def layers_for(d: float, gamma: float) -> int:
    """Layer count for a distance of d pendellösung units at coin angle gamma."""
    if d < 0.0:
        raise ValueError(f"distance must be >= 0, got {d}")
    if not 0.0 < gamma <= math.pi / 2.0:
        raise ValueError(f"gamma must lie in (0, pi/2], got {gamma!r}")
    return round(math.pi * d / gamma)


def distance_per_layer(gamma: float) -> float:
    """Distance one layer spans, in pendellösung units."""
    if not 0.0 < gamma <= math.pi / 2.0:
        raise ValueError(f"gamma must lie in (0, pi/2], got {gamma!r}")
    return gamma / math.pi


# Silicon (220) fixture used by the tests and the worked examples.  The
# structure factor is back-solved once so that si220_constants() lands on
# the published 50.38 um pendellösung length for 0.235 nm neutrons; the
# raw 8*b_c(Si) value with no Debye-Waller correction would give ~33.2 fm.
_SILICON_CELL_EDGE_NM = 0.54310
_SI220_WAVELENGTH_NM = 0.235
_SI220_PENDELLOSUNG_UM = 50.38

_SI220_V_CELL = _SILICON_CELL_EDGE_NM**3
_SI220_THETA_B = math.asin(_SI220_WAVELENGTH_NM * math.sqrt(2.0) / _SILICON_CELL_EDGE_NM)

SI220_STRUCTURE_FACTOR_FM = (
    math.pi * _SI220_V_CELL * math.cos(_SI220_THETA_B)
    / (_SI220_WAVELENGTH_NM * _SI220_PENDELLOSUNG_UM * 1.0e-3)
)


def si220_constants(wavelength_nm: float = _SI220_WAVELENGTH_NM) -> CrystalConstants:
    """Constants for the silicon (220) reflection at the given wavelength."""
    theta_b = math.asin(wavelength_nm * math.sqrt(2.0) / _SILICON_CELL_EDGE_NM)
    return CrystalConstants(
        v_cell=_SI220_V_CELL,
        wavelength=wavelength_nm,
        theta_b=theta_b,
        f_h=SI220_STRUCTURE_FACTOR_FM,
    )
