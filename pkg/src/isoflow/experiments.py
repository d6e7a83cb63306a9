"""Experiment drivers behind the command line: runs, comparisons, checks.

Output files of :func:`run` (in ``out_dir``):

    trajectory.csv   t,d_ev,d_off,f   (17 significant digits)
    plot.gp          gnuplot script, semilog d_off against t
    final.mat        final state in the matrix text format
    report.json      the RunReport
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .fixtures import Fixture, fixture as load_fixture
from .flows import (
    FlowProblem,
    ZeroFlow,
    circulant_kernel_witness,
    default_target,
    double_bracket_field,
    equilibrium_residual,
    shader_counterexample,
    zero_flow_field,
)
from .integrate import IntegratorConfig, TrajectoryLog, TrajectoryMonitor, rk45_integrate
from .symspace import (
    SparsityPattern,
    double_bracket_operator,
    pattern_operator,
    pattern_project,
    random_sym,
    svec,
    sym_eigen,
    write_matrix,
)

CSV_HEADER = "t,d_ev,d_off,f"


@dataclass
class RunReport:
    fixture: str
    flow: str
    config: dict
    max_d_ev: float
    final_d_off: float
    final_f: float
    wall_time: float
    accepted_steps: int
    rejected_steps: int
    truncated: bool
    singular_evaluations: int
    off_pattern_max: float
    paths: dict = field(default_factory=dict)


def write_csv(path, log: TrajectoryLog) -> None:
    rows = [CSV_HEADER]
    for t, a, b, c in zip(log.times, log.d_ev, log.d_off, log.f):
        rows.append(f"{t:.17g},{a:.17g},{b:.17g},{c:.17g}")
    Path(path).write_text("\n".join(rows) + "\n")


def read_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def gnuplot_script(title: str, series: list[tuple[str, str]]) -> str:
    """Semilog-y d_off against t for each ``(csv_file, label)``."""
    plots = ", \\\n     ".join(
        f"'{csv}' using 1:3 with lines title '{label}'" for csv, label in series)
    return (
        "set datafile separator ','\n"
        "set key autotitle columnhead\n"
        "set logscale y\n"
        "set format y '10^{%L}'\n"
        "set xlabel 't'\n"
        "set ylabel 'd_{off}(t)'\n"
        f"set title '{title}'\n"
        "set terminal pngcairo size 800,600\n"
        f"set output '{title.replace(' ', '_')}.png'\n"
        f"plot {plots}\n"
    )


def _fixture(fx) -> Fixture:
    return fx if isinstance(fx, Fixture) else load_fixture(fx)


def run(fx, kind: str, cfg: IntegratorConfig, out_dir=None) -> tuple[RunReport, TrajectoryLog]:
    """Integrate one flow from a fixture; with ``out_dir`` write the output files."""
    fx = _fixture(fx)
    problem = FlowProblem(kind, fx.X0)
    monitor = TrajectoryMonitor(fx.X0, problem.D)
    start = time.perf_counter()
    log = rk45_integrate(problem.field(), fx.X0, cfg, monitor=monitor)
    wall = time.perf_counter() - start
    off = float(np.max(np.abs(log.final_state[~problem.pattern.mask]), initial=0.0))
    report = RunReport(
        fixture=fx.name, flow=kind, config=asdict(cfg),
        max_d_ev=float(np.max(log.d_ev)), final_d_off=float(log.d_off[-1]),
        final_f=float(log.f[-1]), wall_time=wall,
        accepted_steps=log.accepted_steps, rejected_steps=log.rejected_steps,
        truncated=log.truncated, singular_evaluations=log.singular_flag_count,
        off_pattern_max=off,
    )
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {"csv": out / "trajectory.csv", "plot": out / "plot.gp",
                 "final": out / "final.mat", "report": out / "report.json"}
        write_csv(paths["csv"], log)
        paths["plot"].write_text(gnuplot_script(f"{fx.name} {kind}", [("trajectory.csv", kind)]))
        write_matrix(paths["final"], log.final_state)
        report.paths = {k: str(v) for k, v in paths.items()}
        paths["report"].write_text(json.dumps(asdict(report), indent=2, default=float) + "\n")
    return report, log


def compare(fx, cfg: IntegratorConfig, out_dir=None, kinds=("zero", "double_bracket")):
    """Run the zero and double-bracket flows with identical settings.

    Returns ``(reports, logs)``. With ``out_dir`` each flow gets its own
    subdirectory and a long-format ``compare.csv`` (``flow,t,d_ev,d_off,f``)
    plus ``compare.gp`` is written alongside.
    """
    fx = _fixture(fx)
    reports, logs = {}, {}
    for kind in kinds:
        sub = None if out_dir is None else Path(out_dir) / kind
        reports[kind], logs[kind] = run(fx, kind, cfg, sub)
    if out_dir is not None:
        out = Path(out_dir)
        rows = ["flow," + CSV_HEADER]
        for kind, log in logs.items():
            for t, a, b, c in zip(log.times, log.d_ev, log.d_off, log.f):
                rows.append(f"{kind},{t:.17g},{a:.17g},{b:.17g},{c:.17g}")
        (out / "compare.csv").write_text("\n".join(rows) + "\n")
        (out / "compare.gp").write_text(gnuplot_script(
            f"{fx.name} comparison", [(f"{k}/trajectory.csv", k) for k in kinds]))
    return reports, logs


def first_to_converge(logs: dict, threshold: float = 1e-6) -> dict:
    """First sample time with d_off <= threshold, per flow (inf if never)."""
    return {k: log.first_time_below(threshold) for k, log in logs.items()}


@dataclass
class ScalingReport:
    c: float
    max_error: float
    tol: float
    samples: int

    @property
    def passed(self) -> bool:
        return self.max_error <= self.tol


def scaling_check(c: float, fx, t_final: float = 2.0, samples: int = 50,
                  abstol: float = 1e-13, reltol: float = 1e-13, D=None) -> ScalingReport:
    """Compare ``c X(c t)`` with ``Y(t)``, Y the double-bracket solution from ``c X0``.

    Both trajectories are stepped onto the same ``samples`` checkpoints
    (``k t_final / samples`` for Y, ``c`` times that for X). Passes when the
    largest Frobenius gap is at most ``1e-7 c |X0|_F``.
    """
    if not c > 0:
        raise ValueError("scale factor must be positive")
    X0 = _fixture(fx).X0
    D = default_target(X0.shape[0]) if D is None else D

    def field(X):
        return double_bracket_field(X, D)

    def states(Z0, T):
        cfg = IntegratorConfig(t_final=T, abstol=abstol, reltol=reltol, sample_interval=T / samples)
        log = rk45_integrate(field, Z0, cfg, monitor=TrajectoryMonitor(Z0, D),
                             keep_states=True, exact_samples=True)
        return log.states

    xs = states(X0, c * t_final)
    ys = states(c * X0, t_final)
    if len(xs) != len(ys):
        raise RuntimeError("checkpoint grids differ")
    err = max(float(np.linalg.norm(c * X - Y)) for X, Y in zip(xs, ys))
    return ScalingReport(c, err, 1e-7 * c * float(np.linalg.norm(X0)), len(xs))


@dataclass
class ProbeReport:
    delta: float
    radius: float
    exit_time: float
    max_distance: float

    @property
    def left_ball(self) -> bool:
        return math.isfinite(self.exit_time)


def instability_probe(E, D, pattern: SparsityPattern, delta: float = 1e-3,
                      t_final: float = 50.0, seed: int = 0) -> ProbeReport:
    """Perturb ``E`` by ``delta R`` (R random in Sym(pattern), |R|_F = 1), run the zero flow
    and record the first sample time at which ``|X(t) - E|_F > 10 delta``.

    An empirical probe only; leaving the ball is evidence of instability, not a proof.
    """
    rng = np.random.default_rng(seed)
    R = pattern_project(pattern, random_sym(pattern.n, rng))
    R /= np.linalg.norm(R)
    X0 = E + delta * R
    cfg = IntegratorConfig(t_final=t_final, abstol=1e-12, reltol=1e-12,
                           sample_interval=t_final / 1000)
    log = rk45_integrate(ZeroFlow(D, pattern), X0, cfg, monitor=TrajectoryMonitor(X0, D),
                         keep_states=True)
    dist = np.array([np.linalg.norm(X - E) for X in log.states])
    radius = 10.0 * delta
    out = np.nonzero(dist > radius)[0]
    exit_time = float(log.times[out[0]]) if out.size else math.inf
    return ProbeReport(delta, radius, exit_time, float(dist.max()))


@dataclass
class CounterexampleReport:
    shader_residual: float
    shader_field_norm: float
    shader_probe: ProbeReport
    circulant_kernel_residual: float
    circulant_mY_max: float
    circulant_min_eig: float

    def checks(self) -> list[tuple[str, bool, str]]:
        p = self.shader_probe
        return [
            ("shader equilibrium residual <= 1e-9", self.shader_residual <= 1e-9,
             f"{self.shader_residual:.3e}"),
            ("shader zero-flow field norm <= 1e-10", self.shader_field_norm <= 1e-10,
             f"{self.shader_field_norm:.3e}"),
            ("shader probe leaves the 10*delta ball before t=50", p.left_ball,
             f"exit t={p.exit_time:.4g}, max distance {p.max_distance:.3e}"),
            ("circulant |(A.X + m) Y| <= 1e-12", self.circulant_kernel_residual <= 1e-12,
             f"{self.circulant_kernel_residual:.3e}"),
            ("circulant m.Y == 0 exactly", self.circulant_mY_max == 0.0,
             f"{self.circulant_mY_max:.3e}"),
            ("circulant min eig(A.X + m) <= 1e-12", self.circulant_min_eig <= 1e-12,
             f"{self.circulant_min_eig:.3e}"),
        ]

    @property
    def passed(self) -> bool:
        return all(ok for _, ok, _ in self.checks())


def counterexamples(seed: int = 0) -> CounterexampleReport:
    E, D, _ = shader_counterexample(1.0, 2.0, 2.0)
    pattern = SparsityPattern.from_matrix(E)
    rep = equilibrium_residual(E, D, pattern)
    g = zero_flow_field(E, D, pattern)
    probe = instability_probe(E, D, pattern, seed=seed)

    X, Y = circulant_kernel_witness()
    cpat = SparsityPattern.from_matrix(X)
    op = double_bracket_operator(X).coeffs + pattern_operator(cpat).coeffs
    kernel = float(np.linalg.norm(op @ svec(Y)))
    mY = float(np.max(np.abs(pattern_project(cpat, Y))))
    min_eig = float(sym_eigen(op).values[0])
    return CounterexampleReport(rep.residual, float(np.linalg.norm(g)), probe, kernel, mY, min_eig)
