"""Command-line interface: ``ci`` on a CSV sample, ``simulate`` for coverage tables.

Exit codes: 0 success, 2 unreadable or malformed input, 3 stratum smaller
than two units, 4 infeasible configuration.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from causalboot.bootstrap import METHOD_NAMES, DegenerateBootstrapError, MethodSpec
from causalboot.fisher import InfeasibleExhaustiveError
from causalboot.inference import infer
from causalboot.population import CsvFormatError, ObservedSample, SampleError
from causalboot.resampling import SeedSpec
from causalboot.simulation import DesignSpec, default_threads, run_coverage

EXIT_OK, EXIT_INPUT, EXIT_STRATUM, EXIT_CONFIG = 0, 2, 3, 4


def _g6(x: float) -> float:
    return float(f"{x:.6g}")


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; usage errors here are config errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="causalboot", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ci = sub.add_parser("ci", help="confidence interval for the ATE of a y,w CSV")
    ci.add_argument("--data", required=True, help="CSV file with header y,w")
    ci.add_argument("--method", default="cboot-pivotal-agl", help=", ".join(METHOD_NAMES))
    ci.add_argument("--level", type=float, default=0.95)
    ci.add_argument("--N", type=int, default=None, help="population size (default n)")
    ci.add_argument("--B", type=int, default=999)
    ci.add_argument("--M", type=int, default=999, help="Fisher reference draws")
    ci.add_argument("--seed", type=int, default=0)
    ci.add_argument("--assignment", default="complete")

    sim = sub.add_parser("simulate", help="Monte Carlo coverage table for one design")
    sim.add_argument("--design", required=True, help="1-4, coupling:RHO:N0:N1 or mixture:N0:N1")
    sim.add_argument("--methods", default=",".join(METHOD_NAMES))
    sim.add_argument("--reps", type=int, default=5000)
    sim.add_argument("--B", type=int, default=999)
    sim.add_argument("--M", type=int, default=999, help="Fisher reference draws")
    sim.add_argument("--level", type=float, default=0.95)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--threads", type=int, default=None)
    sim.add_argument("--out", required=True, help="output prefix for .csv and .json")
    return parser


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def cmd_ci(args) -> int:
    if not 0 < args.level < 1:
        return _fail(EXIT_CONFIG, "--level must lie in (0, 1)")
    if args.seed < 0:
        return _fail(EXIT_CONFIG, "--seed must be nonnegative")
    try:
        spec = MethodSpec.from_name(args.method, B=args.B, assignment_mode=args.assignment)
    except ValueError as exc:
        return _fail(EXIT_CONFIG, str(exc))
    try:
        s = ObservedSample.from_csv(args.data)
    except (OSError, UnicodeDecodeError) as exc:
        return _fail(EXIT_INPUT, f"cannot read {args.data}: {exc}")
    except CsvFormatError as exc:
        return _fail(EXIT_INPUT, f"{args.data}: {exc}")
    except SampleError as exc:
        return _fail(EXIT_STRATUM, str(exc))
    N = s.n if args.N is None else args.N
    if N < s.n:
        return _fail(EXIT_CONFIG, "population smaller than sample")
    try:
        res = infer(s, [spec], N, args.level, SeedSpec(args.seed, 0), args.M)[spec.name]
    except (DegenerateBootstrapError, InfeasibleExhaustiveError, ValueError) as exc:
        return _fail(EXIT_CONFIG, str(exc))
    out = {
        "tau_hat": _g6(res.tau_hat),
        "sigma_hat": _g6(res.sigma_hat),
        "ci_lo": _g6(res.ci.lo),
        "ci_hi": _g6(res.ci.hi),
        "implied_se": _g6(res.ci.implied_se),
        "method": spec.name,
        "skipped": res.skipped,
        "seed": args.seed,
    }
    print(json.dumps(out))
    return EXIT_OK


def cmd_simulate(args) -> int:
    try:
        design = DesignSpec.parse(args.design)
    except ValueError as exc:
        return _fail(EXIT_CONFIG, str(exc))
    if args.reps < 1 or args.B < 1 or not 0 < args.level < 1 or args.seed < 0:
        return _fail(EXIT_CONFIG, "invalid --reps/--B/--level/--seed")
    try:
        methods = [MethodSpec.from_name(m.strip(), B=args.B) for m in args.methods.split(",")]
    except ValueError as exc:
        return _fail(EXIT_CONFIG, str(exc))
    threads = default_threads() if args.threads is None else args.threads
    report = run_coverage(
        design, methods, args.reps, args.B, args.level, args.seed, threads, args.M
    )
    prefix = Path(args.out)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    Path(f"{prefix}.csv").write_text(report.to_csv(), encoding="utf-8")
    Path(f"{prefix}.json").write_text(report.to_json(), encoding="utf-8")
    print(report.to_csv(), end="")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "ci":
        return cmd_ci(args)
    return cmd_simulate(args)


if __name__ == "__main__":
    sys.exit(main())
