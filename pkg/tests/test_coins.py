import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from braggwalk.coins import FREE, CoinParams, ColumnSpec, Crystal, Free, coin_of, make_coin

INV_SQRT2 = 1.0 / math.sqrt(2.0)


def test_free_space_coin_is_identity():
    u = make_coin(CoinParams(0.0, 0.0, 0.0))
    assert np.array_equal(u, np.eye(2, dtype=np.complex128))


def test_total_reflection_coin():
    u = make_coin(CoinParams(math.pi / 2, 0.0, 0.0))
    expected = np.array([[0.0, 1.0], [-1.0, 0.0]], dtype=np.complex128)
    assert np.allclose(u, expected, atol=1e-15)


def test_quarter_turn_coin_with_transmission_phase():
    u = make_coin(CoinParams(math.pi / 4, math.pi / 2, 0.0))
    expected = np.array(
        [[1j * INV_SQRT2, INV_SQRT2], [-INV_SQRT2, -1j * INV_SQRT2]],
        dtype=np.complex128,
    )
    assert np.allclose(u, expected, atol=1e-15)


def test_unitarity_for_1000_random_triples():
    rng = np.random.default_rng(20240817)
    worst = 0.0
    for _ in range(1000):
        gamma = rng.uniform(0.0, math.pi / 2)
        xi, zeta = rng.uniform(-math.pi, math.pi, size=2)
        u = make_coin(CoinParams(gamma, xi, zeta))
        err = np.max(np.abs(u.conj().T @ u - np.eye(2)))
        worst = max(worst, float(err))
    assert worst < 1e-12


@given(
    gamma=st.floats(-10.0, 10.0, allow_nan=False),
    xi=st.floats(-10.0, 10.0, allow_nan=False),
    zeta=st.floats(-10.0, 10.0, allow_nan=False),
)
@settings(max_examples=200, deadline=None)
def test_canonicalization_and_unitarity_hold_for_any_angles(gamma, xi, zeta):
    p = CoinParams(gamma, xi, zeta)
    assert 0.0 <= p.gamma <= math.pi / 2
    assert -math.pi < p.xi <= math.pi
    assert -math.pi < p.zeta <= math.pi
    u = make_coin(p)
    assert np.max(np.abs(u.conj().T @ u - np.eye(2))) < 1e-12


def test_canonicalization_preserves_amplitude_magnitudes():
    p = CoinParams(2.0, 0.0, 0.0)  # beyond pi/2, reflected back in range
    assert math.isclose(math.sin(p.gamma), abs(math.sin(2.0)), rel_tol=1e-12)


def test_coin_rejects_non_finite_parameters():
    with pytest.raises(ValueError):
        CoinParams(float("nan"), 0.0, 0.0)
    with pytest.raises(ValueError):
        CoinParams(0.0, float("inf"), 0.0)


def test_free_node_equals_zero_angle_crystal():
    spec_free = ColumnSpec((FREE,) * 5)
    spec_zero = ColumnSpec((Crystal(CoinParams(0.0, 0.0, 0.0)),) * 5)
    for a, b in zip(spec_free.coefficients(), spec_zero.coefficients()):
        assert np.array_equal(a, b)
    assert coin_of(FREE) == CoinParams(0.0, 0.0, 0.0)


def test_column_spec_validates_and_caches():
    with pytest.raises(ValueError):
        ColumnSpec(())
    with pytest.raises(TypeError):
        ColumnSpec((FREE, "crystal"))
    spec = ColumnSpec((FREE, Crystal(CoinParams(0.3)), FREE))
    assert spec.height == 3
    first = spec.coefficients()
    assert spec.coefficients() is first
    ta, rb, ra, tb = first
    assert ta[0] == 1.0 and rb[0] == 0.0
    assert ta[1] == pytest.approx(math.cos(0.3))
    assert rb[1] == pytest.approx(math.sin(0.3))
    assert ra[1] == pytest.approx(-math.sin(0.3))
    assert tb[1] == pytest.approx(math.cos(0.3))
    with pytest.raises(ValueError):
        first[0][0] = 2.0  # cached arrays are read-only


def test_node_kinds_are_value_types():
    assert Free() == FREE
    assert Crystal(CoinParams(0.1)) == Crystal(CoinParams(0.1))
    assert Crystal(CoinParams(0.1)) != Crystal(CoinParams(0.2))
