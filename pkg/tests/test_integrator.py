import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trichokin.integrator import (
    MAX_SAMPLES,
    _clamp,
    IntegrationError,
    SimulationConfig,
    convergence_order,
    integrate,
    rk4_path,
)
from trichokin.kinetics import DomainError, State
from trichokin.scenarios import BUILTIN_SCENARIOS, BASELINE_PARAMS, VALIDATION_2_PARAMS


def test_no_biomass_matches_exponential_decay(baseline):
    cfg = SimulationConfig(State(45, 0, 50, 0), t_end=2000)
    traj = integrate(cfg, baseline)
    exact = 45 * np.exp(-0.176 * traj.times)
    assert np.all(np.abs(traj.X - exact) <= 1e-6 * exact + 1e-12)
    assert np.all(traj.B == 0) and np.all(traj.P == 0)
    assert traj.final.s == pytest.approx(95.0, rel=1e-9)
    assert traj.steady_state_reached


def test_equilibrium_start_is_constant(baseline):
    traj = integrate(SimulationConfig(State(0, 0, 7.5, 3.0)), baseline)
    assert traj.steady_state_reached
    assert np.all(traj.states == [0, 0, 7.5, 3.0])
    forced = integrate(SimulationConfig(State(0, 0, 7.5, 3.0), t_end=5, stop_at_steady_state=False), baseline)
    assert len(forced) > 1 and np.all(forced.states == [0, 0, 7.5, 3.0])


def test_baseline_limits(baseline_traj):
    f = baseline_traj.final
    assert f.s == pytest.approx(1.1745, rel=0.01)
    assert f.P == pytest.approx(31.8399, rel=0.01)
    assert f.X < 1e-6 and f.B < 1e-6
    assert baseline_traj.steady_state_reached and baseline_traj.t_final < 2000


def test_trajectory_shape(baseline_traj):
    assert np.all(np.diff(baseline_traj.times) > 0)
    assert baseline_traj.states.shape == (len(baseline_traj.times), 4)
    assert np.all(np.diff(baseline_traj.P) >= -1e-9)
    assert np.all(baseline_traj.states >= 0)


def test_default_stride_caps_samples(baseline):
    cfg = SimulationConfig(State(45, 0.0, 50, 0), t_end=2000, stop_at_steady_state=False)
    traj = integrate(cfg, baseline)
    assert len(traj) <= MAX_SAMPLES + 1
    assert traj.times[-1] == 2000.0


def test_horizon_not_multiple_of_step(baseline):
    traj = integrate(SimulationConfig(State(45, 15, 50, 0), h=0.3, t_end=1.0), baseline)
    assert traj.times[-1] == 1.0
    assert np.allclose(np.diff(traj.times)[:-1], 0.3)


def test_deterministic(baseline):
    cfg = SimulationConfig(State(90, 15, 50, 0), h=0.05, t_end=300)
    a, b = integrate(cfg, baseline), integrate(cfg, baseline)
    assert np.array_equal(a.states, b.states) and np.array_equal(a.times, b.times)


def test_step_too_large_is_an_error(baseline):
    with pytest.raises(IntegrationError, match="step-size too large"):
        integrate(SimulationConfig(State(45, 15, 50, 0), h=20.0, t_end=100), baseline)


def test_substrate_exhaustion_leaves_orthant():
    # With X0 = 0 the maintenance drain m_s*B outpaces hydrolysis once s is used
    # up; refining the step moves the crossing time but never removes it.
    p = dataclasses.replace(BASELINE_PARAMS, k_d=0.03, growth=dataclasses.replace(BASELINE_PARAMS.growth, mu_max=0.2))
    ic = State(0.0, 78.22, 28.63, 79.16)
    crossings = []
    for h in (0.01, 0.001):
        with pytest.raises(IntegrationError, match="leaves the non-negative orthant") as exc:
            integrate(SimulationConfig(ic, h=h, t_end=50), p)
        crossings.append(float(str(exc.value).split("at t=")[1].split()[0]))
    assert crossings[0] == pytest.approx(crossings[1], abs=0.02)


def test_clamp_policy(baseline):
    assert _clamp((1.0, -5e-13, 2.0, 0.0), 1e-12, 3.0, baseline) == (1.0, 0.0, 2.0, 0.0)
    with pytest.raises(IntegrationError, match="B=-2.000e-12 went negative at t=3 h"):
        _clamp((1.0, -2e-12, 2.0, 0.0), 1e-12, 3.0, baseline)
    with pytest.raises(IntegrationError, match="non-finite"):
        _clamp((math.inf, 0.0, 2.0, 0.0), 1e-12, 3.0, baseline)


@pytest.mark.parametrize(
    "kwargs",
    [dict(h=0.0), dict(h=-1.0), dict(t_end=0.0), dict(steady_tol=0.0), dict(record_stride=0), dict(h=math.nan)],
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        SimulationConfig(State(1, 1, 1, 1), **kwargs)


def test_config_rejects_negative_initial():
    with pytest.raises(DomainError):
        SimulationConfig(State(1, -1, 1, 1))


def test_convergence_order_baseline(baseline):
    cfg = SimulationConfig(State(45, 15, 50, 0), h=0.1, t_end=10)
    assert 3.5 <= convergence_order(cfg, baseline, 10.0) <= 4.5


def test_convergence_order_preconditions(baseline):
    cfg = SimulationConfig(State(45, 15, 50, 0), h=0.1, t_end=10)
    with pytest.raises(ValueError, match="multiple"):
        convergence_order(cfg, baseline, 9.9)
    with pytest.raises(ValueError, match="t_end"):
        convergence_order(cfg, baseline, 20.0)
    with pytest.raises(ValueError, match="refine t_check or enlarge h"):
        convergence_order(SimulationConfig(State(0, 0, 5, 5), h=0.1, t_end=10), baseline, 10.0)


def test_linear_case_error_scales_as_h4(baseline):
    errs = []
    for h in (0.4, 0.2, 0.1):
        cfg = SimulationConfig(State(45, 0, 50, 0), h=h, t_end=40, stop_at_steady_state=False)
        errs.append(abs(integrate(cfg, baseline).final.X - 45 * math.exp(-0.176 * 40)))
    slopes = np.diff(np.log2(errs)) / np.diff(np.log2([0.4, 0.2, 0.1]))
    assert np.allclose(slopes, 4.0, atol=0.1)
    assert all(14 <= errs[i] / errs[i + 1] <= 18 for i in range(2))


def test_validation2_convergence_order():
    sc = BUILTIN_SCENARIOS["validation-2"]
    order = convergence_order(sc.simulation_config(h=0.2, t_end=20), sc.params, 20.0)
    assert 3.5 <= order <= 4.5


def test_rk4_path_exact_for_cubic():
    # RK4 integrates y' = 3t^2 (autonomous form) without truncation error
    path = rk4_path(lambda y: (1.0, 3.0 * y[0] ** 2), (0.0, 0.0), 0.5, 4)
    assert path[-1] == pytest.approx([2.0, 8.0], rel=1e-14)


ic = st.tuples(*[st.floats(0.0, 60.0)] * 4).map(lambda t: State(*t))


@settings(max_examples=25, deadline=None)
@given(ic, st.sampled_from([BASELINE_PARAMS, VALIDATION_2_PARAMS]))
def test_monotone_product_and_bounded(state, p):
    try:
        traj = integrate(SimulationConfig(state, h=0.05, t_end=150, record_stride=1), p)
    except IntegrationError as exc:
        # the only admissible failure is the genuine exit of the flow at s = 0
        assert "leaves the non-negative orthant" in str(exc)
        return
    assert np.all(np.isfinite(traj.states))
    assert np.all(traj.states >= 0)
    assert np.all(np.diff(traj.P) >= -1e-9)
