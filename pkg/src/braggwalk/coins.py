"""Node coin unitaries and per-column node layouts.

Every lattice node mixes the two incoming amplitudes (up-mover, down-mover)
with a 2x2 unitary before they are shifted to the neighbouring rows.  A
crystal node carries a three-parameter coin; a free-space node is the
identity coin, so the modes just translate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CoinParams",
    "NodeKind",
    "Crystal",
    "Free",
    "FREE",
    "ColumnSpec",
    "make_coin",
    "coin_of",
]

_TWO_PI = 2.0 * math.pi


def _wrap_phase(angle: float) -> float:
    """Map an angle into (-pi, pi]."""
    a = math.fmod(angle, _TWO_PI)
    if a > math.pi:
        a -= _TWO_PI
    elif a <= -math.pi:
        a += _TWO_PI
    return a


@dataclass(frozen=True)
class CoinParams:
    """Parameters of one node coin.

    ``gamma`` sets the reflection amplitude (sin gamma) and transmission
    amplitude (cos gamma); ``xi`` and ``zeta`` are the transmission and
    reflection phases.  Angles are canonicalized on construction: gamma
    into [0, pi/2], the phases into (-pi, pi].
    """

    gamma: float
    xi: float = 0.0
    zeta: float = 0.0

    def __post_init__(self):
        for name in ("gamma", "xi", "zeta"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"coin parameter {name} must be finite, got {v!r}")
        g = _wrap_phase(self.gamma)
        # reflect gamma into [0, pi/2]; sin/cos magnitudes are what matter
        if g < 0.0:
            g = -g
        if g > math.pi / 2.0:
            g = math.pi - g
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "xi", _wrap_phase(self.xi))
        object.__setattr__(self, "zeta", _wrap_phase(self.zeta))


def make_coin(params: CoinParams) -> np.ndarray:
    """Return the 2x2 node unitary [[t_a, r_b], [r_a, t_b]].

    t_a = e^{+i xi} cos gamma,  r_b = e^{+i zeta} sin gamma,
    r_a = -e^{-i zeta} sin gamma,  t_b = e^{-i xi} cos gamma.

    The matrix is unitary for every parameter triple.
    """
    c = math.cos(params.gamma)
    s = math.sin(params.gamma)
    ta = np.exp(1j * params.xi) * c
    rb = np.exp(1j * params.zeta) * s
    ra = -np.exp(-1j * params.zeta) * s
    tb = np.exp(-1j * params.xi) * c
    return np.array([[ta, rb], [ra, tb]], dtype=np.complex128)


class NodeKind:
    """Marker base class: a node is either Crystal(coin) or Free."""

    __slots__ = ()


@dataclass(frozen=True)
class Crystal(NodeKind):
    """Bragg-diffracting node carrying a coin."""

    coin: CoinParams


@dataclass(frozen=True)
class Free(NodeKind):
    """Free-space node: behaves exactly like Crystal(CoinParams(0, 0, 0))."""


FREE = Free()

_FREE_COIN = CoinParams(0.0, 0.0, 0.0)


def coin_of(kind: NodeKind) -> CoinParams:
    """Coin equivalent of a node kind (Free maps to the identity coin)."""
    if isinstance(kind, Crystal):
        return kind.coin
    if isinstance(kind, Free):
        return _FREE_COIN
    raise TypeError(f"not a NodeKind: {kind!r}")


@dataclass(frozen=True, eq=True)
class ColumnSpec:
    """Ordered node kinds for one lattice column (row 0 is the bottom).

    Immutable; the per-row coefficient arrays used by the propagation
    kernel are built lazily and cached on first use.
    """

    kinds: tuple[NodeKind, ...]

    def __post_init__(self):
        kinds = tuple(self.kinds)
        if len(kinds) < 1:
            raise ValueError("a column needs at least one node")
        for k in kinds:
            if not isinstance(k, NodeKind):
                raise TypeError(f"not a NodeKind: {k!r}")
        object.__setattr__(self, "kinds", kinds)

    @property
    def height(self) -> int:
        return len(self.kinds)

    def coefficients(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Per-row coefficient arrays (t_a, r_b, r_a, t_b), cached."""
        cached = getattr(self, "_coeffs", None)
        if cached is None:
            h = self.height
            ta = np.empty(h, dtype=np.complex128)
            rb = np.empty(h, dtype=np.complex128)
            ra = np.empty(h, dtype=np.complex128)
            tb = np.empty(h, dtype=np.complex128)
            for m, kind in enumerate(self.kinds):
                u = make_coin(coin_of(kind))
                ta[m] = u[0, 0]
                rb[m] = u[0, 1]
                ra[m] = u[1, 0]
                tb[m] = u[1, 1]
            for arr in (ta, rb, ra, tb):
                arr.setflags(write=False)
            cached = (ta, rb, ra, tb)
            object.__setattr__(self, "_coeffs", cached)
        return cached
