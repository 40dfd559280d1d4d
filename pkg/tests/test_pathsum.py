import math

import numpy as np
import pytest

from braggwalk.coins import FREE, CoinParams, ColumnSpec, Crystal
from braggwalk.pathsum import path_sum_amplitude, path_sum_state
from braggwalk.walk import WalkState, apply_column


def uniform_crystal(height, gamma):
    return ColumnSpec((Crystal(CoinParams(gamma)),) * height)


def test_double_transmission_is_single_path():
    gamma = 0.6
    specs = [uniform_crystal(9, gamma)] * 2
    amp = path_sum_amplitude(specs, source=(4, "up"), target=(6, "up"))
    assert amp == pytest.approx(math.cos(gamma) ** 2)


def test_transmit_then_reflect_product():
    gamma = 0.6
    specs = [uniform_crystal(9, gamma)] * 2
    amp = path_sum_amplitude(specs, source=(4, "up"), target=(4, "down"))
    assert amp == pytest.approx(-math.cos(gamma) * math.sin(gamma))


def random_specs(rng, ncols, height):
    specs = []
    for _ in range(ncols):
        kinds = tuple(
            Crystal(
                CoinParams(
                    rng.uniform(0, math.pi / 2),
                    rng.uniform(-math.pi, math.pi),
                    rng.uniform(-math.pi, math.pi),
                )
            )
            if rng.random() < 0.7
            else FREE
            for _ in range(height)
        )
        specs.append(ColumnSpec(kinds))
    return specs


def propagate(specs, source):
    row, mode = source
    state = WalkState.zero(specs[0].height)
    (state.up if mode == "up" else state.down)[row] = 1.0
    for spec in specs:
        state = apply_column(state, spec)
    return state


def test_oracle_matches_matrix_propagation_on_random_lattice():
    rng = np.random.default_rng(99)
    specs = random_specs(rng, ncols=6, height=13)
    source = (7, "up")
    state = propagate(specs, source)
    oracle = path_sum_state(specs, source)
    assert np.max(np.abs(state.up - oracle.up)) < 1e-12
    assert np.max(np.abs(state.down - oracle.down)) < 1e-12
    assert state.leak_top == pytest.approx(oracle.leak_top, abs=1e-12)
    assert state.leak_bottom == pytest.approx(oracle.leak_bottom, abs=1e-12)


def test_single_amplitude_lookup_agrees_with_full_map():
    rng = np.random.default_rng(3)
    specs = random_specs(rng, ncols=5, height=7)
    oracle = path_sum_state(specs, (3, "down"))
    for row in range(7):
        assert path_sum_amplitude(specs, (3, "down"), (row, "up")) == oracle.up[row]
        assert path_sum_amplitude(specs, (3, "down"), (row, "down")) == oracle.down[row]


def test_path_count_bound_enforced():
    specs = [uniform_crystal(3, 0.3)] * 21
    with pytest.raises(ValueError, match="bound"):
        path_sum_state(specs, (1, "up"), max_paths=2**20)
    # a tighter explicit bound rejects earlier
    with pytest.raises(ValueError, match="bound"):
        path_sum_state([uniform_crystal(3, 0.3)] * 5, (1, "up"), max_paths=16)


def test_invalid_source_and_target_rejected():
    specs = [uniform_crystal(4, 0.2)] * 2
    with pytest.raises(ValueError, match="row"):
        path_sum_state(specs, (4, "up"))
    with pytest.raises(ValueError, match="mode"):
        path_sum_state(specs, (1, "sideways"))
    with pytest.raises(ValueError, match="row"):
        path_sum_amplitude(specs, (1, "up"), (-1, "down"))
    with pytest.raises(ValueError, match="height"):
        path_sum_state([uniform_crystal(4, 0.2), uniform_crystal(5, 0.2)], (1, "up"))
