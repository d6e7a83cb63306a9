"""Command line entry point.

Exit codes: 0 success, 2 a check failed, 3 integrator failure, 4 bad input.
"""

from __future__ import annotations

import argparse
import sys

from . import experiments, suites
from .errors import IntegratorError, IsoflowError
from .fixtures import FIXTURE_NAMES, default_t_final
from .integrate import IntegratorConfig

EXIT_OK, EXIT_ASSERT, EXIT_INTEGRATOR, EXIT_INPUT = 0, 2, 3, 4

FLOW_ALIASES = {"zero": "zero", "db": "double_bracket", "toda": "toda"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _config(args, fixture_name: str) -> IntegratorConfig:
    t_final = args.tfinal if args.tfinal is not None else default_t_final(fixture_name)
    return IntegratorConfig(t_final=t_final, abstol=args.abstol, reltol=args.reltol,
                            sample_interval=args.sample_interval, max_steps=args.max_steps)


def _print_report(r: experiments.RunReport) -> None:
    print(f"{r.fixture} {r.flow}: t={r.config['t_final']:g} steps={r.accepted_steps}"
          f" (+{r.rejected_steps} rejected) max d_ev={r.max_d_ev:.3e}"
          f" final d_off={r.final_d_off:.3e} f={r.final_f:.6g} wall={r.wall_time:.2f}s")
    if r.truncated:
        print("  warning: max_steps reached, log truncated")
    if r.singular_evaluations:
        print(f"  warning: {r.singular_evaluations} field evaluations hit a singular A.X+m")


def cmd_run(args) -> int:
    cfg = _config(args, args.fixture)
    report, _ = experiments.run(args.fixture, FLOW_ALIASES[args.flow], cfg, args.out)
    _print_report(report)
    return EXIT_INTEGRATOR if report.truncated else EXIT_OK


def cmd_compare(args) -> int:
    cfg = _config(args, args.fixture)
    reports, logs = experiments.compare(args.fixture, cfg, args.out)
    for r in reports.values():
        _print_report(r)
    for kind, t in experiments.first_to_converge(logs, args.threshold).items():
        print(f"first t with d_off <= {args.threshold:g}: {kind} {t:g}")
    return EXIT_OK


def cmd_scaling(args) -> int:
    r = experiments.scaling_check(args.c, args.fixture, args.tfinal, abstol=args.abstol,
                                  reltol=args.reltol)
    print(f"{'PASS' if r.passed else 'FAIL'} scaling c={r.c:g}: max |cX(ct)-Y(t)|_F ="
          f" {r.max_error:.3e} (tol {r.tol:.3e}, {r.samples} samples)")
    return EXIT_OK if r.passed else EXIT_ASSERT


def cmd_counterexamples(args) -> int:
    r = experiments.counterexamples(seed=args.seed)
    for name, ok, detail in r.checks():
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return EXIT_OK if r.passed else EXIT_ASSERT


def cmd_selftest(args) -> int:
    checks = suites.run_all()
    for c in checks:
        print(c.line())
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_ASSERT


def _integration_args(p, fixture_required=True):
    p.add_argument("--fixture", required=fixture_required, default="t5",
                   help=f"one of {', '.join(FIXTURE_NAMES)} or file:<path>")
    p.add_argument("--tfinal", type=float, default=None, help="final time (fixture default)")
    p.add_argument("--abstol", type=float, default=1e-13)
    p.add_argument("--reltol", type=float, default=1e-13)
    p.add_argument("--max-steps", type=int, default=10**7)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="isoflow", description="Isospectral sparsity-preserving flows.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="integrate one flow")
    _integration_args(p)
    p.add_argument("--flow", choices=sorted(FLOW_ALIASES), default="zero")
    p.add_argument("--sample-interval", type=float, default=None)
    p.add_argument("--out", default=None, help="output directory")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="zero flow against double-bracket flow")
    _integration_args(p)
    p.add_argument("--sample-interval", type=float, default=None)
    p.add_argument("--threshold", type=float, default=1e-6)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("scaling", help="check c X(c t) against the flow from c X0")
    p.add_argument("--c", type=float, required=True)
    _integration_args(p, fixture_required=False)
    p.set_defaults(func=cmd_scaling, tfinal=2.0)

    p = sub.add_parser("counterexamples", help="shader equilibrium and circulant singularity")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_counterexamples)

    p = sub.add_parser("selftest", help="seeded property suites")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except IntegratorError as exc:
        print(f"integrator failure: {exc}", file=sys.stderr)
        return EXIT_INTEGRATOR
    except (IsoflowError, ValueError, OSError) as exc:
        print(f"bad input: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
