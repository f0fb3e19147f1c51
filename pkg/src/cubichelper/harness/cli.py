"""Command line entry point.

Exit status: 0 on success, 2 for configuration errors (bad flags, missing or
malformed files), 3 for numerical failures and output errors.
"""

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from ..baselines import LineSearchError
from ..costmodel import choose_m
from ..cubic_solver import CubicSolverError
from ..optimizer import DivergenceError, StepFailure, solve_to_optimality
from ..problems import GradDominanceSpec, logreg_oracle, synthetic_classification
from .config import ConfigError, build_method, build_problem, load_config
from .csvio import write_table_csv, write_trace_csv
from .presets import PRESETS, SUMMARY_COLUMNS, run_method, summarize

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
NUMERIC_ERRORS = (StepFailure, DivergenceError, LineSearchError, CubicSolverError, FloatingPointError,
                  np.linalg.LinAlgError)


class OutputError(RuntimeError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _common(parser):
    parser.add_argument("--config", help="key = value configuration file")
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override one configuration key (repeatable)")


def build_parser():
    parser = _Parser(prog="cubichelper", description="Cubic Newton with helper functions")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="run one configured method")
    _common(p)
    p.add_argument("--output", help="trace CSV path (default: stdout)")
    p.add_argument("--timing", action="store_true", help="record wall times")

    p = sub.add_parser("preset", help="run a named experiment preset")
    p.add_argument("name", choices=sorted(PRESETS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--outdir", default="results")
    p.add_argument("--data", help="LibSVM file (default: synthetic stand-in)")
    p.add_argument("--n-features", type=int)
    p.add_argument("--m", type=int, help="inner loop length")
    p.add_argument("--S", type=int, help="outer rounds")
    p.add_argument("--timing", action="store_true")

    p = sub.add_parser("sweep-m", help="run one method for several inner loop lengths")
    _common(p)
    p.add_argument("--m-values", default="1,2,5,10,20")
    p.add_argument("--iters", type=int, default=60, help="cubic steps per run")
    p.add_argument("--outdir", default="results/sweep-m")
    p.add_argument("--timing", action="store_true")

    p = sub.add_parser("cost-model", help="optimal inner loop lengths from the cost model")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)

    p = sub.add_parser("verify", help="per-step inequality audit and dominance check")
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    return parser


def _write_trace(trace, path, timing):
    try:
        write_trace_csv(trace, trace.ledger, path, timing)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from None


def cmd_run(args):
    values = load_config(args.config, args.overrides)
    oracle = build_problem(values)
    config = build_method(values, oracle)
    _, trace = run_method(oracle, config)
    output = args.output or values.get("output")
    timing = args.timing or values.get("timing", False)
    _write_trace(trace, output or sys.stdout, timing)
    return EXIT_OK


def cmd_preset(args):
    func = PRESETS[args.name]
    if args.name == "crossover":
        rows = func(outdir=args.outdir)
        print(f"wrote {len(rows)} rows to {Path(args.outdir) / 'crossover.csv'}")
        return EXIT_OK
    kwargs = dict(seed=args.seed, outdir=args.outdir, timing=args.timing)
    if args.data:
        from ..problems import load_libsvm
        try:
            kwargs["data"] = load_libsvm(args.data, args.n_features)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot load {args.data}: {exc}") from None
    if args.S is not None:
        kwargs["S"] = args.S
    if args.m is not None:
        if args.name == "auxiliary":
            kwargs["m_values"] = (1, args.m)
        else:
            kwargs["m"] = args.m
    try:
        _, summary = func(**kwargs)
    except OSError as exc:
        raise OutputError(str(exc)) from None
    for row in summary:
        print(f"{row['method']:>12}  f={row['final_f']:.10g}  gradcost={row['gradcost_total']:.6g}")
    return EXIT_OK


def cmd_sweep_m(args):
    values = load_config(args.config, args.overrides)
    try:
        m_values = [int(v) for v in args.m_values.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad --m-values {args.m_values!r}") from None
    if args.iters < 1 or not m_values or min(m_values) < 1:
        raise ConfigError("--iters and every m must be positive")
    oracle = build_problem(values)
    outdir = Path(args.outdir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(str(exc)) from None
    rows = []
    for m in m_values:
        config = build_method(dict(values, method="cubic", m=m, S=math.ceil(args.iters / m)), oracle)
        _, trace = run_method(oracle, config)
        _write_trace(trace, outdir / f"m{m}.csv", args.timing)
        rows.append(summarize(f"m{m}", trace))
        print(f"m={m:<4d} f={trace[-1].f:.10g}  gradcost={trace.ledger.gradcost_total:.6g}")
    write_table_csv(rows, SUMMARY_COLUMNS, outdir / "summary.csv")
    return EXIT_OK


def cmd_cost_model(args):
    if min(args.n, args.d) < 1:
        raise ConfigError("--n and --d must be positive")
    print(f"{'method':<8}{'m_star':>10}{'cost_star':>20}")
    for method in ("vr", "lazy"):
        m_star, cost = choose_m(args.n, args.d, method)
        print(f"{method:<8}{m_star:>10d}{float(cost):>20.6f}")
    return EXIT_OK


def cmd_verify(args):
    from ..cubic_solver import factorize, solve_cubic
    from ..verify import audit_step, check_grad_dominance

    data = synthetic_classification(500, 20, args.seed)
    oracle = logreg_oracle(data, l2=1e-2)
    rng = np.random.default_rng(np.random.SeedSequence(args.seed))
    x = 3.0 * rng.standard_normal(oracle.d)
    failures = 0
    for _ in range(args.steps):
        g, H = oracle.grad(x), oracle.hess(x)
        step = solve_cubic(factorize(H), g, oracle.L)
        record = audit_step(oracle, x, x + step.s, g, H, oracle.L, step=step)
        failures += not record.ok
        x = x + step.s
    print(f"audit: {args.steps - failures}/{args.steps} steps satisfy all four inequalities")
    solve_to_optimality(oracle)
    points = [oracle.x_star + rng.standard_normal(oracle.d) for _ in range(200)]
    violations = check_grad_dominance(oracle, GradDominanceSpec(1 / (2 * 1e-2), 2), points)
    print(f"gradient dominance: {violations} violations at {len(points)} points")
    return EXIT_OK if failures == 0 and violations == 0 else EXIT_NUMERIC


COMMANDS = {"run": cmd_run, "preset": cmd_preset, "sweep-m": cmd_sweep_m, "cost-model": cmd_cost_model,
            "verify": cmd_verify}


def cli_main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERIC_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OutputError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main():
    sys.exit(cli_main())
