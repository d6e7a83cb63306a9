import math

import numpy as np
import pytest

from isoflow.errors import StiffnessError
from isoflow.fixtures import fixture
from isoflow.flows import FlowProblem, default_target
from isoflow.integrate import (
    B4,
    B5,
    C,
    A,
    IntegratorConfig,
    TrajectoryMonitor,
    d_ev,
    d_off,
    rk45_integrate,
)
from isoflow.symspace import random_sym


def test_tableau_consistency():
    assert B5.sum() == pytest.approx(1.0, abs=1e-15)
    assert B4.sum() == pytest.approx(1.0, abs=1e-15)
    for s in range(1, 7):
        assert A[s].sum() == pytest.approx(C[s], abs=1e-15)
    np.testing.assert_array_equal(A[6], B5[:6])  # FSAL


def test_config_validation():
    cfg = IntegratorConfig(t_final=8.0)
    assert cfg.sample_interval == 8.0 / 400
    assert cfg.first_step() == 1e-3
    assert IntegratorConfig(t_final=0.01).first_step() == pytest.approx(1e-4)
    for bad in (dict(t_final=0.0), dict(t_final=1.0, abstol=0.0), dict(t_final=1.0, reltol=-1.0),
                dict(t_final=1.0, sample_interval=0.0), dict(t_final=1.0, max_steps=0)):
        with pytest.raises(ValueError):
            IntegratorConfig(**bad)


def linear_monitor(X):
    return 0.0, 0.0, float(np.trace(X))


def test_linear_decay():
    log = rk45_integrate(lambda X: -X, np.eye(2), IntegratorConfig(t_final=1.0), monitor=linear_monitor)
    np.testing.assert_allclose(log.final_state, math.exp(-1) * np.eye(2), atol=1e-10)
    assert log.times[0] == 0.0 and log.times[-1] == 1.0
    assert np.all(np.diff(log.times) > 0)
    assert len(log.d_ev) == len(log.d_off) == len(log.f) == len(log.times)


def test_zero_field():
    X0 = random_sym(3, np.random.default_rng(0))
    log = rk45_integrate(lambda X: np.zeros_like(X), X0, IntegratorConfig(t_final=2.0),
                         monitor=linear_monitor)
    np.testing.assert_array_equal(log.final_state, X0)
    assert log.rejected_steps == 0


def test_tolerance_reduces_error():
    errs = []
    for tol in (1e-8, 1e-10, 1e-12, 1e-13):
        cfg = IntegratorConfig(t_final=1.0, abstol=tol, reltol=tol)
        log = rk45_integrate(lambda X: -X, np.eye(2), cfg, monitor=linear_monitor)
        err = float(np.max(np.abs(log.final_state - math.exp(-1) * np.eye(2))))
        assert err <= 100 * tol
        errs.append(err)
    assert all(b <= a for a, b in zip(errs, errs[1:]))


def test_exact_samples_lands_on_grid():
    cfg = IntegratorConfig(t_final=1.0, sample_interval=0.1)
    log = rk45_integrate(lambda X: -X, np.eye(2), cfg, monitor=linear_monitor, keep_states=True,
                         exact_samples=True)
    np.testing.assert_allclose(log.times, np.linspace(0, 1, 11), atol=1e-15)
    assert len(log.states) == 11
    for t, X in zip(log.times, log.states):
        np.testing.assert_allclose(X, math.exp(-t) * np.eye(2), atol=1e-10)


def test_max_steps_truncates():
    cfg = IntegratorConfig(t_final=10.0, max_steps=5)
    log = rk45_integrate(lambda X: -X, np.eye(2), cfg, monitor=linear_monitor)
    assert log.truncated
    assert log.accepted_steps + log.rejected_steps == 5
    assert log.final_time < 10.0


def test_blowup_raises():
    # X' = X^2 blows up at t = 1 from X0 = I
    with pytest.raises(StiffnessError):
        rk45_integrate(lambda X: X @ X, np.eye(2), IntegratorConfig(t_final=2.0), monitor=linear_monitor)


def test_determinism():
    X0 = fixture("t5").X0
    f = FlowProblem("zero", X0).field
    cfg = IntegratorConfig(t_final=5.0)
    a = rk45_integrate(f(), X0, cfg)
    b = rk45_integrate(f(), X0, cfg)
    np.testing.assert_array_equal(a.final_state, b.final_state)
    np.testing.assert_array_equal(a.d_off, b.d_off)
    np.testing.assert_array_equal(a.times, b.times)


# -- monitors --------------------------------------------------------------


def test_d_ev_examples(rng):
    X0 = random_sym(5, rng)
    assert d_ev(X0, X0) == 0.0
    Q, _ = np.linalg.qr(rng.standard_normal((5, 5)))
    assert d_ev(X0, Q @ X0 @ Q.T) <= 1e-12
    assert d_ev(np.diag([1.0, 2.0]), np.diag([1.0, 3.0])) == pytest.approx(1 / math.sqrt(5), rel=1e-15)
    with pytest.raises(ZeroDivisionError):
        d_ev(np.zeros((2, 2)), np.eye(2))


def test_d_off_examples(rng):
    X0 = random_sym(4, rng)
    assert d_off(X0, np.diag([1.0, 2.0, 3.0, 4.0])) == 0.0
    assert d_off(X0, X0) == 1.0
    assert d_off([[0.0, 2.0], [2.0, 0.0]], [[0.0, 1.0], [1.0, 0.0]]) == 0.5
    with pytest.raises(ZeroDivisionError):
        d_off(np.eye(3), X0[:3, :3])


def test_monitor_nan_when_undefined():
    m = TrajectoryMonitor(np.eye(2))
    dev, doff, f = m(np.eye(2))
    assert dev == 0.0 and math.isnan(doff) and f == pytest.approx(0.5)


# -- flows along trajectories ---------------------------------------------


@pytest.mark.parametrize("kind", ["zero", "double_bracket"])
def test_isospectral_and_descending(kind):
    X0 = fixture("example1").X0
    cfg = IntegratorConfig(t_final=10.0)
    log = rk45_integrate(FlowProblem(kind, X0).field(), X0, cfg,
                         monitor=TrajectoryMonitor(X0, default_target(6)))
    assert np.max(log.d_ev) <= 1e-10
    assert np.all(np.diff(log.f) <= 1e-12 * (1 + log.f[0]))
    assert log.d_off[-1] < log.d_off[0]
    np.testing.assert_array_equal(log.final_state, log.final_state.T)


def test_db_example1_to_60():
    X0 = fixture("example1").X0
    log = rk45_integrate(FlowProblem("double_bracket", X0).field(), X0, IntegratorConfig(t_final=60.0))
    assert np.max(log.d_ev) <= 1e-10
