import math

import numpy as np
import pytest

from dswave import BumpProfile, EquationKind, Field, GridSpec, Monitors, StepControl, evolve, make_initial_data, rk4_step
from dswave.integrator import Criterion, RunStatus

QUIET = Monitors(energy=False)


def constant_field(u0, dims=1):
    g = GridSpec(dims, 1.0, 8, "Periodic")
    return Field(g, np.zeros(g.shape), np.full(g.shape, float(u0)))


def test_step_control_validation():
    with pytest.raises(ValueError) as err:
        StepControl(1.0, cfl=0.0, dt_max=-1.0, snapshot_stride=0, amplitude_cap=0.0)
    msg = str(err.value)
    for word in ("cfl", "dt_max", "snapshot_stride", "amplitude_cap"):
        assert word in msg


def test_dt_schedule_is_nondecreasing():
    c = StepControl(20.0, cfl=0.5, dt_max=0.05)
    dts = [c.dt(t, 0.01) for t in np.linspace(0, 20, 200)]
    assert all(b >= a for a, b in zip(dts, dts[1:]))
    assert dts[0] == pytest.approx(0.005) and dts[-1] == pytest.approx(0.05)
    assert c.dt(5.0, 0.01, tau_frame=True) == pytest.approx(0.005)


def test_rk4_is_fourth_order_on_linear_ode():
    errs = []
    for dt in (0.05, 0.025):
        f = constant_field(1.0)
        t = 0.0
        while t < 1.0 - 1e-12:
            f = rk4_step(f, t, dt, EquationKind.linear())
            t += dt
        errs.append(abs(f.phi_t[0] - math.exp(-1.5)))
    assert errs[0] / errs[1] == pytest.approx(16, rel=0.1)
    with pytest.raises(ValueError):
        rk4_step(constant_field(1.0), 0.0, 0.0, EquationKind.linear())


def test_linear_homogeneous_matches_exponential():
    out = evolve(constant_field(1.0), EquationKind.linear(), StepControl(1.0, cfl=1.0, dt_max=1e-3), QUIET)
    assert out.completed and out.final_time == pytest.approx(1.0)
    assert abs(out.final.phi_t[0] / math.exp(-1.5) - 1) < 1e-8


def test_riccati_blowup_is_detected_and_order_robust():
    ts = []
    for dt in (2e-3, 1e-3):
        out = evolve(constant_field(2.0), EquationKind.semilinear(), StepControl(2.0, cfl=1.0, dt_max=dt), QUIET)
        assert out.status is RunStatus.BLOW_UP and out.criterion is Criterion.AMPLITUDE
        assert out.lifespan_lower_bound < out.t_detect
        ts.append(out.t_detect)
    t_star = math.log(4) / 1.5
    assert all(abs(t - t_star) / t_star < 0.02 for t in ts)
    assert abs(ts[0] - ts[1]) < 5e-3


def test_degenerate_initial_state_stops_at_start():
    out = evolve(constant_field(1.0), EquationKind.extremal(), StepControl(1.0), QUIET)
    assert out.status is RunStatus.BLOW_UP
    assert out.criterion is Criterion.TIMELIKE and out.t_detect == 0.0 and out.steps == 0


def test_generalized_degenerate_start_reports_denominator():
    out = evolve(constant_field(1.2), EquationKind.generalized(0.5), StepControl(1.0), QUIET)
    assert out.status is RunStatus.BLOW_UP
    assert out.criterion is Criterion.DENOMINATOR and out.t_detect == 0.0


def test_tau_frame_rules():
    g = GridSpec(1, 3.5, 65)
    init = make_initial_data(BumpProfile(), BumpProfile(), 0.01, g)
    with pytest.raises(ValueError, match="tau = 0"):
        evolve(init, EquationKind.born_infeld(), StepControl(0.5), QUIET)
    out = evolve(init, EquationKind.born_infeld(), StepControl(-1.0), QUIET)
    assert out.completed and out.trajectory[0].t == -2.0 and out.final_time == pytest.approx(-1.0)
    assert out.energy_series == []


def test_grid_dimension_must_match_equation():
    with pytest.raises(ValueError, match="2-D grid"):
        evolve(constant_field(0.1), EquationKind.linear(2), StepControl(0.1), QUIET)


def test_runs_are_bitwise_deterministic():
    g = GridSpec(2, 3.5, 33)
    init = make_initial_data(BumpProfile(), BumpProfile(), 0.3, g)
    a = evolve(init, EquationKind.semilinear(2), StepControl(1.0))
    b = evolve(init, EquationKind.semilinear(2), StepControl(1.0))
    assert all(np.array_equal(x.phi, y.phi) and np.array_equal(x.phi_t, y.phi_t)
               for x, y in zip(a.trajectory, b.trajectory))
    assert [r.F for r in a.energy_series] == [r.F for r in b.energy_series]


def test_snapshot_stride_and_final_snapshot():
    out = evolve(constant_field(0.1), EquationKind.linear(), StepControl(1.0, cfl=1.0, dt_max=0.1, snapshot_stride=3), QUIET)
    ts = [s.t for s in out.trajectory]
    assert ts[0] == 0.0 and ts[-1] == pytest.approx(1.0)
    assert out.steps == 10 and len(ts) == 1 + 3 + 1


def test_energy_series_sampled_each_step():
    g = GridSpec(1, 3.5, 33)
    init = make_initial_data(BumpProfile(), None, 0.1, g)
    out = evolve(init, EquationKind.linear(), StepControl(0.5, dt_max=0.05))
    assert len(out.energy_series) == out.steps + 1
    assert all(math.isfinite(r.identity_residual) for r in out.energy_series)
