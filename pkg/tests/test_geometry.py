import math

import numpy as np
import pytest

from braggwalk.coins import Crystal, Free, CoinParams
from braggwalk.errors import ResourceError
from braggwalk.geometry import (
    CavityGeometry,
    SourceSpec,
    build_lattice_plan,
    build_slab_plan,
    column_spec_at,
    initial_state,
)
from braggwalk.physics import Resolution
from braggwalk.walk import apply_column


def test_flagship_cavity_plan_dimensions():
    plan = build_lattice_plan(CavityGeometry(87.5, 12.0, 16000.0), Resolution(20))
    assert plan.rows_top_blade == 1750
    assert plan.rows_gap == 240
    assert plan.rows_bottom_blade == 1750
    assert plan.height == 3740
    assert plan.columns == 320000
    assert plan.columns_per_bounce == 480


def test_zero_gap_becomes_single_slab():
    plan = build_lattice_plan(CavityGeometry(1.0, 0.0, 1.0), Resolution(10))
    assert plan.rows_gap == 0
    assert plan.height == 20
    assert plan.surface_trace_row is None
    spec = column_spec_at(plan, 0)
    assert all(isinstance(k, Crystal) for k in spec.kinds)


def test_mid_size_plan_arithmetic():
    plan = build_lattice_plan(CavityGeometry(10.0, 4.0, 600.0), Resolution(50))
    assert plan.height == 1200
    assert plan.columns == 30000


def test_default_source_sits_on_the_top_blade_inner_surface():
    plan = build_lattice_plan(CavityGeometry(10.0, 4.0, 100.0), Resolution(20))
    assert plan.source.row == plan.rows_bottom_blade + plan.rows_gap
    assert plan.source.row == plan.top_blade_inner_row
    assert plan.source.mode == "up"
    state = initial_state(plan)
    assert state.up[plan.source.row] == 1.0
    assert state.norm == pytest.approx(1.0)


def test_column_spec_bands_and_cache():
    plan = build_lattice_plan(CavityGeometry(2.0, 1.0, 10.0), Resolution(10))
    spec = column_spec_at(plan, 0)
    kinds = spec.kinds
    assert all(isinstance(k, Crystal) for k in kinds[:20])
    assert all(isinstance(k, Free) for k in kinds[20:30])
    assert all(isinstance(k, Crystal) for k in kinds[30:])
    # uniform along the cavity, shared object
    assert column_spec_at(plan, plan.columns - 1) is spec
    with pytest.raises(ValueError):
        column_spec_at(plan, plan.columns)
    with pytest.raises(ValueError):
        column_spec_at(plan, -1)


def test_geometry_validation():
    with pytest.raises(ValueError, match="blade_thickness_t"):
        CavityGeometry(0.0, 1.0, 10.0)
    with pytest.raises(ValueError, match="blade_thickness_t"):
        CavityGeometry(-3.0, 1.0, 10.0)
    with pytest.raises(ValueError, match="gap_d"):
        CavityGeometry(1.0, -0.1, 10.0)
    with pytest.raises(ValueError, match="length_l"):
        CavityGeometry(1.0, 1.0, 0.0)


def test_rounding_consistency():
    res = Resolution(7)
    geometry = CavityGeometry(3.3, 1.9, 10.6)
    plan = build_lattice_plan(geometry, res)
    n = res.layers_per_pendellosung
    assert abs(plan.rows_top_blade / n - geometry.blade_thickness_t) < 1.0 / n
    assert abs(plan.rows_gap / n - geometry.gap_d) < 1.0 / n
    assert abs(plan.columns / n - geometry.length_l) < 1.0 / n


def test_sub_layer_blade_rejected():
    with pytest.raises(ValueError, match="rounds to zero"):
        build_lattice_plan(CavityGeometry(0.01, 1.0, 10.0), Resolution(10))


def test_node_budget_enforced():
    with pytest.raises(ResourceError) as err:
        build_lattice_plan(CavityGeometry(10.0, 4.0, 600.0), Resolution(50), max_nodes=1000)
    assert err.value.required == 1200 * 30000
    assert err.value.budget == 1000


def test_zero_gap_plan_equals_explicit_slab_step_by_step():
    res = Resolution(10)
    plan_cavity = build_lattice_plan(CavityGeometry(2.0, 0.0, 5.0), res)
    plan_slab = build_slab_plan(4.0, 5.0, res,
                                source=SourceSpec(row=plan_cavity.source.row, mode="up"))
    assert plan_slab.height == plan_cavity.height
    state_a = initial_state(plan_cavity)
    state_b = initial_state(plan_slab)
    for col in range(plan_cavity.columns):
        state_a = apply_column(state_a, column_spec_at(plan_cavity, col))
        state_b = apply_column(state_b, column_spec_at(plan_slab, col))
        assert np.array_equal(state_a.up, state_b.up)
        assert np.array_equal(state_a.down, state_b.down)


def test_slab_plan_defaults_and_validation():
    plan = build_slab_plan(3.0, 8.0, Resolution(10))
    assert plan.rows_gap == 0 and plan.rows_bottom_blade == 0
    assert plan.height == 30 and plan.columns == 80
    assert plan.source.row == 0 and plan.source.mode == "up"
    with pytest.raises(ValueError):
        build_slab_plan(0.0, 8.0, Resolution(10))
    with pytest.raises(ValueError):
        build_slab_plan(3.0, -1.0, Resolution(10))


def test_source_spec_validation():
    with pytest.raises(ValueError):
        SourceSpec(row=-1)
    with pytest.raises(ValueError):
        SourceSpec(row=0, mode="left")
    with pytest.raises(ValueError):
        SourceSpec(row=0, amplitude=0.0)
    with pytest.raises(ValueError):
        SourceSpec(row=0, sigma_rows=0.0)
    plan = build_lattice_plan(CavityGeometry(1.0, 1.0, 2.0), Resolution(10))
    with pytest.raises(ValueError, match="source row"):
        plan.with_source(SourceSpec(row=plan.height))


def test_gaussian_source_normalization_and_tilt():
    res = Resolution(10)
    src = SourceSpec(row=15, mode="down", sigma_rows=3.0, tilt=0.2)
    plan = build_lattice_plan(CavityGeometry(1.0, 1.0, 2.0), res, source=src)
    state = initial_state(plan)
    assert state.norm == pytest.approx(1.0, abs=1e-12)
    assert not np.any(state.up)
    # amplitude profile peaks at the source row and carries the linear phase
    peak = int(np.argmax(np.abs(state.down)))
    assert peak == 15
    phase = np.angle(state.down[16] / state.down[14])
    assert phase == pytest.approx(2 * 0.2, abs=1e-12)


def test_custom_coin_respected():
    coin = CoinParams(0.123, 0.5, -0.5)
    plan = build_lattice_plan(CavityGeometry(1.0, 0.5, 2.0), Resolution(10),
                              source=None, max_nodes=10**6)
    assert plan.coin.gamma == pytest.approx(math.pi / 10)
    plan2 = build_lattice_plan(
        CavityGeometry(1.0, 0.5, 2.0, coin=coin), Resolution(10)
    )
    assert plan2.coin == coin
