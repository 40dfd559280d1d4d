import numpy as np
import pytest

from braggwalk.coins import CoinParams
from braggwalk.engine import RecordingOptions, run_simulation, sweep_gap
from braggwalk.errors import NumericsError, ResourceError, SweepError
from braggwalk.geometry import (
    CavityGeometry,
    SourceSpec,
    build_lattice_plan,
    column_spec_at,
    initial_state,
)
from braggwalk.physics import Resolution
from braggwalk.walk import apply_column


RES = Resolution(10)


def small_plan(t=2.0, gap=1.0, length=20.0, **kwargs):
    return build_lattice_plan(CavityGeometry(t, gap, length), RES, **kwargs)


def test_conservation_ledger():
    record = run_simulation(small_plan())
    s = record.final_state
    assert record.final_confined + s.leak_top + s.leak_bottom == pytest.approx(1.0, abs=1e-10)
    cumulative = np.cumsum(record.exit_top + record.exit_bottom)
    assert np.max(np.abs(record.confined - (1.0 - cumulative))) < 1e-10
    assert np.all(np.diff(record.confined) <= 1e-15)  # non-increasing


def test_all_free_plan_leaks_through_the_top_exactly():
    # gamma = 0 everywhere: free transport in disguise
    plan = build_lattice_plan(
        CavityGeometry(2.0, 1.0, 20.0, coin=CoinParams(0.0)), RES
    )
    h = plan.height
    r = plan.source.row
    record = run_simulation(plan)
    expected_col = h - 1 - r  # the up-mover sits on the top row after this many columns
    assert record.exit_top[expected_col + 1 - 1] == pytest.approx(1.0)
    assert record.confined[expected_col] == pytest.approx(0.0, abs=1e-30)
    others = np.delete(record.exit_top, expected_col)
    assert not np.any(others)


def test_runs_are_deterministic():
    a = run_simulation(small_plan())
    b = run_simulation(small_plan())
    assert np.array_equal(a.confined, b.confined)
    assert np.array_equal(a.intensity_map, b.intensity_map)
    assert np.array_equal(a.final_state.up, b.final_state.up)
    assert a.final_state.leak_top == b.final_state.leak_top


def test_exit_bottom_is_zero_until_geometrically_reachable():
    plan = small_plan(length=30.0)
    record = run_simulation(plan)
    s = plan.source.row
    assert not np.any(record.exit_bottom[:s])
    assert record.exit_bottom[s] > 0.0


def test_surface_trace_matches_manual_propagation():
    plan = small_plan(length=3.0)
    record = run_simulation(plan)
    state = initial_state(plan)
    srow = plan.surface_trace_row
    for col in range(plan.columns):
        state = apply_column(state, column_spec_at(plan, col))
        assert record.surface_trace[col] == pytest.approx(abs(state.down[srow]) ** 2)
        assert record.confined[col] == pytest.approx(state.norm)


def test_intensity_map_sampling_geometry():
    options = RecordingOptions(map_column_stride=7, map_row_stride=3)
    plan = small_plan(length=5.0)
    record = run_simulation(plan, options)
    assert np.array_equal(record.col_samples, np.arange(0, plan.columns, 7))
    assert np.array_equal(record.row_samples, np.arange(0, plan.height, 3))
    assert record.intensity_map.shape == (record.col_samples.size, record.row_samples.size)
    # strides default to one sample per pendellosung length
    defaults = run_simulation(small_plan(length=5.0))
    assert np.array_equal(defaults.col_samples, np.arange(0, 50, 10))


def test_recording_can_be_switched_off():
    options = RecordingOptions(
        record_map=False, record_surface_trace=False, record_exit_traces=False
    )
    record = run_simulation(small_plan(), options)
    assert record.intensity_map is None
    assert record.exit_top is None
    assert record.surface_trace is None
    assert record.confined.size == 200


def test_surface_trace_skipped_without_gap():
    plan = build_lattice_plan(CavityGeometry(1.0, 0.0, 5.0), RES)
    record = run_simulation(plan)
    assert record.surface_trace is None


def test_memory_budget_rejected_with_requirements():
    with pytest.raises(ResourceError) as err:
        run_simulation(small_plan(), max_bytes=100)
    assert err.value.required > 100
    assert err.value.budget == 100


def test_recording_options_validation():
    with pytest.raises(ValueError):
        RecordingOptions(map_column_stride=0)
    with pytest.raises(ValueError):
        RecordingOptions(map_row_stride=-1)


def test_non_finite_amplitudes_abort(monkeypatch):
    import braggwalk.engine as engine

    def bad_kernel(up, down, coeffs, out_up, out_down, scratch):
        out_up[:] = np.nan
        out_down[:] = 0.0
        return 0.0, 0.0

    monkeypatch.setattr(engine, "step_kernel", bad_kernel)
    with pytest.raises(NumericsError, match="column 0"):
        run_simulation(small_plan())


def test_sweep_single_gap_matches_direct_run():
    base = CavityGeometry(2.0, 1.0, 20.0)
    results = sweep_gap(base, [1.0], RES)
    direct = run_simulation(small_plan())
    assert results == [(1.0, direct.final_confined)]


def test_sweep_preserves_input_order_and_parallel_matches_serial():
    base = CavityGeometry(2.0, 1.0, 20.0)
    gaps = [1.5, 0.5, 1.0]
    serial = sweep_gap(base, gaps, RES, workers=1)
    assert [g for g, _ in serial] == gaps
    parallel = sweep_gap(base, gaps, RES, workers=2)
    assert parallel == serial


def test_sweep_failure_reports_gap_and_keeps_partial_results():
    base = CavityGeometry(2.0, 1.0, 20.0)
    with pytest.raises(SweepError) as err:
        sweep_gap(base, [1.0, -3.0, 2.0], RES)
    assert len(err.value.partial) == 2
    assert [g for g, _ in err.value.partial] == [1.0, 2.0]
    (gap, message), = err.value.failures
    assert gap == -3.0
    assert "gap_d" in message


def test_final_state_mode_intensities():
    record = run_simulation(small_plan())
    s = record.final_state
    up = float(np.vdot(s.up, s.up).real)
    down = float(np.vdot(s.down, s.down).real)
    assert record.final_up_intensity == pytest.approx(up)
    assert record.final_down_intensity == pytest.approx(down)
    assert up + down == pytest.approx(record.final_confined, abs=1e-12)
