import pytest

import gaitsync as gs


def test_clock_nominal_and_drift():
    assert gs.DriftingClock(0.0).ticks_at(1.0) == 32768
    assert gs.DriftingClock(10.0).ticks_at(100.0) == 3276832
    with pytest.raises(ValueError):
        gs.DriftingClock(-10.5)


def test_open_loop_run_drifts_linearly():
    params = gs.RunParams.defaults_for(gs.Scheme.OPEN_LOOP)
    r = gs.run_scheme(gs.Scheme.OPEN_LOOP, params)
    assert abs(abs(r.samples[-1][2]) - 2000.0) <= 62.0
    assert r.fitted_slope_us_per_s == pytest.approx(-5.0, abs=0.1)
    assert r.analytic_bound_us is None


def test_synchronized_run_is_bounded():
    r = gs.run_scheme(gs.Scheme.SYNCHRONIZED, gs.RunParams.defaults_for(gs.Scheme.SYNCHRONIZED))
    assert r.max_abs_error_us <= 122.0
    assert r.analytic_bound_us == pytest.approx(120.518, abs=1e-3)
    assert len(r.resync_marks) > 0
    assert r.to_csv().startswith("true_time_s,period_index,error_us,resync\n")


def test_schedule_and_helpers():
    events = gs.build_schedule()
    assert len(events) == 8
    assert len(gs.events_for_controller(events, gs.Controller.M1)) == 4
    assert gs.classify_gait(500000.0, 1.0) == gs.GaitHealth.OPPOSED
    assert gs.time_to_opposition(5.0, 1.0) == pytest.approx(100000.0)
    assert gs.time_to_opposition(0.0, 1.0) is None


def test_sweep_and_cli():
    rows = gs.sweep_resync_period([30.0, 10.0], gs.RunParams())
    assert [r[0] for r in rows] == [10.0, 30.0]
    assert rows[0][1] <= rows[1][1]
    code, out, _ = gs.cli(["run", "--help"])
    assert code == 0 and "--scheme" in out
    code, _, err = gs.cli(["run", "--bogus"])
    assert code == 2 and err
