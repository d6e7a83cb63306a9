import math

import numpy as np
import pytest

from isoflow.experiments import (
    compare,
    first_to_converge,
    gnuplot_script,
    instability_probe,
    run,
    scaling_check,
)
from isoflow.flows import shader_counterexample
from isoflow.integrate import IntegratorConfig
from isoflow.suites import Check, projector_suite, parallel_sum_suite
from isoflow.symspace import SparsityPattern


def test_scaling_trivial_c1():
    r = scaling_check(1.0, "t5", t_final=1.0)
    assert r.max_error == 0.0 and r.passed


def test_scaling_random_tridiagonal():
    from isoflow.fixtures import Fixture

    rng = np.random.default_rng(7)
    off = rng.uniform(0.5, 1.5, 5)
    X = np.diag(rng.standard_normal(6)) + np.diag(off, 1) + np.diag(off, -1)
    assert scaling_check(2.0, Fixture("rand", X, "random tridiagonal"), t_final=1.0).passed


def test_scaling_rejects_nonpositive():
    with pytest.raises(ValueError):
        scaling_check(0.0, "t5")


def test_zero_flow_leads_on_t5():
    _, logs = compare("t5", IntegratorConfig(t_final=40.0))
    t = first_to_converge(logs, 1e-8)
    assert t["zero"] < t["double_bracket"] < math.inf


def test_zero_flow_keeps_pattern_example2():
    rep, log = run("example2", "zero", IntegratorConfig(t_final=5.0))
    assert rep.off_pattern_max == 0.0
    assert rep.singular_evaluations == 0


def test_probe_stays_near_stable_target():
    # the diagonal target itself is a stable equilibrium, so the probe should not escape
    D = np.diag([1.0, 2.0, 3.0])
    rep = instability_probe(D, D, SparsityPattern.tridiagonal(3), t_final=10.0)
    assert not rep.left_ball
    assert rep.max_distance <= rep.radius


def test_probe_leaves_shader_point():
    E, D, _ = shader_counterexample()
    rep = instability_probe(E, D, SparsityPattern.from_matrix(E), seed=3)
    assert rep.left_ball and rep.exit_time < 50


def test_gnuplot_script_lists_series():
    s = gnuplot_script("x", [("a/trajectory.csv", "zero"), ("b/trajectory.csv", "db")])
    assert "'a/trajectory.csv' using 1:3" in s and "'b/trajectory.csv' using 1:3" in s


def test_suites_small():
    checks = parallel_sum_suite(n_pairs=20) + projector_suite(n_pairs=10)
    assert all(isinstance(c, Check) and c.passed for c in checks)
