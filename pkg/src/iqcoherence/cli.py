"""Command-line entry point: ``iqcoherence {measure,verify,sample,table,list-suites}``.

Exit codes: 0 success or all trials pass, 2 a tolerance check failed,
3 bad input (files, flags, unknown names), 4 solver non-convergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import harness as hs
from . import states as st
from .convexroof import RoofConfig
from .errors import IQCoherenceError, MaxIterations


def _add_common(p):
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="iqcoherence", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    m = sub.add_parser("measure", help="compute one measure on a state file")
    m.add_argument("--state", required=True)
    m.add_argument("--measure", required=True)
    m.add_argument("--bipartition", help="dAxdB, or dAxdBxdC read as A|BC")
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--roof-restarts", type=int, default=32)
    _add_common(m)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("--suite")
    v.add_argument("--config", help="JSON document with SuiteSpec fields; flags override it")
    v.add_argument("--trials", type=int)
    v.add_argument("--seed", type=int)
    v.add_argument("--bipartition", dest="dims", help="dimension pattern, e.g. 2x2 or 2x2x2")
    v.add_argument("--ensemble")
    v.add_argument("--tol", type=float)
    v.add_argument("--roof-tol", type=float)
    v.add_argument("--roof-restarts", type=int)
    v.add_argument("--threads", type=int, help=f"worker threads; {hs.THREADS_ENV} overrides")
    _add_common(v)

    s = sub.add_parser("sample", help="write seeded random states to a directory")
    s.add_argument("--kind", required=True, choices=st.ENSEMBLE_KINDS)
    s.add_argument("--bipartition", dest="dims", required=True, help="dimension pattern, e.g. 2x2")
    s.add_argument("--trials", dest="count", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--rank", type=int)
    s.add_argument("--name", help="named state for kind=named")
    s.add_argument("--out", required=True)

    t = sub.add_parser("table", help="C_l1, C_max and log2(1 + C_l1) on rho(lambda)")
    t.add_argument("--lambdas", help="comma-separated values in [0, 1]")
    t.add_argument("--steps", type=int, default=21, help="uniform grid size when --lambdas is absent")
    t.add_argument("--out")

    sub.add_parser("list-suites", help="print the registered suites")
    return parser


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _measure(args) -> int:
    cfg = RoofConfig(restarts=args.roof_restarts, seed=args.seed)
    report = hs.cmd_measure(args.state, args.measure, args.bipartition, cfg)
    if args.format == "csv":
        text = "measure,value,method,bound_direction\n" + ",".join(
            [report.measure, hs._fmt(report.value), report.method, report.bound_direction]) + "\n"
    else:
        text = json.dumps(report.as_dict(), indent=2, default=hs._json_default) + "\n"
    _emit(text, args.out)
    return hs.EXIT_OK


def _verify(args) -> int:
    config = hs.load_config(args.config) if args.config else None
    flags = {"suite": args.suite, "trials": args.trials, "seed": args.seed, "dims": args.dims,
             "ensemble": args.ensemble, "tol": args.tol, "roof_tol": args.roof_tol,
             "roof_restarts": args.roof_restarts, "threads": args.threads, "out": args.out,
             "format": args.format}
    spec = hs.build_spec(flags, config)
    report = hs.cmd_verify(spec)
    text = hs.report_csv(report) if spec.format == "csv" else hs.report_json(report)
    _emit(text, spec.out)
    sys.stderr.write(f"{spec.suite}: {report['passed']}/{report['trials']} passed, "
                     f"max violation {report['max_violation']:.3g}\n")
    return hs.exit_code(report)


def _sample(args) -> int:
    spec = st.EnsembleSpec(args.kind, hs.parse_dims(args.dims), args.count, args.seed, args.rank, args.name)
    paths = hs.cmd_sample(spec, args.out)
    sys.stdout.write(f"wrote {len(paths)} states to {args.out}\n")
    return hs.EXIT_OK


def _table(args) -> int:
    if args.lambdas:
        try:
            grid = [float(x) for x in args.lambdas.split(",")]
        except ValueError:
            raise hs.RangeError(f"bad lambda list {args.lambdas!r}")
    else:
        grid = list(np.linspace(0.0, 1.0, args.steps))
    _emit(hs.table_csv(hs.cmd_table(grid)), args.out)
    return hs.EXIT_OK


def _list(args) -> int:
    for s in hs.list_suites():
        sys.stdout.write(f"{s['suite']:<16} dims={s['dims']:<6} trials={s['trials']:<4} {s['summary']}\n")
    return hs.EXIT_OK


COMMANDS = {"measure": _measure, "verify": _verify, "sample": _sample, "table": _table, "list-suites": _list}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except MaxIterations as exc:
        sys.stderr.write(f"error: solver did not converge: {exc}\n")
        return hs.EXIT_NONCONVERGENCE
    except (IQCoherenceError, OSError, json.JSONDecodeError, TypeError) as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return hs.EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
