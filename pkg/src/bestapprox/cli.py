"""Command-line front end: ``bestapprox run|list|emit``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import ConfigError
from .scenarios import (BUILTINS, FORMATS, RunReport, ScenarioConfig, builtin_config, emit_table,
                        list_scenarios, run_scenario)

log = logging.getLogger("bestapprox")

EXIT_OK, EXIT_WITNESS, EXIT_CONFIG = 0, 1, 2


def _u64(text):
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def build_parser():
    p = argparse.ArgumentParser(prog="bestapprox",
                                description="Best-approximation experiments and reports.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="verb", required=True)

    run = sub.add_parser("run", help="run a scenario file or builtin")
    run.add_argument("scenario", help="path to a YAML scenario or a builtin name")
    run.add_argument("--seed", type=_u64, default=0)
    run.add_argument("--budget-scale", type=float, default=1.0,
                     help="multiply sampling budgets (pairs, directions, probes)")
    run.add_argument("--out", help="report path (default: <name>.report.json)")
    run.add_argument("--tolerance", type=float, help="override the solver tolerance")
    run.add_argument("--table", help="also write the delimited table here")

    sub.add_parser("list", help="list builtin scenarios")

    emit = sub.add_parser("emit", help="render a saved report")
    emit.add_argument("report")
    emit.add_argument("--format", default="csv", choices=sorted(FORMATS))
    emit.add_argument("--out", help="output file (default: stdout)")
    return p


def _load_config(ref):
    if ref in BUILTINS:
        return builtin_config(ref)
    path = Path(ref)
    if not path.exists():
        raise ConfigError("scenario", f"{ref!r} is neither a builtin nor an existing file")
    return ScenarioConfig.load(path)


def _cmd_run(args):
    config = _load_config(args.scenario)
    out = args.out or config.output or f"{config.name}.report.json"
    report = run_scenario(config, seed=args.seed, budget_scale=args.budget_scale,
                          tolerance=args.tolerance, out=out)
    for cid, r in report.checks.items():
        flag = "witness" if r.get("witness") else "-"
        passed = {True: "pass", False: "FAIL", None: "-"}[r.get("passed")]
        print(f"{cid:22s} {r['status']:20s} {flag:8s} {passed}")
    if args.table:
        emit_table(report, "csv", args.table)
    for cid in report.unexpected_witnesses:
        print(f"unexpected witness: {cid}", file=sys.stderr)
    for name in report.missing_witnesses:
        print(f"expected witness not produced: {name}", file=sys.stderr)
    for cid in report.failed_checks:
        print(f"failed: {cid}", file=sys.stderr)
    print(f"report: {out}")
    return report.exit_code


def _cmd_list(args):
    for name, desc in list_scenarios():
        print(f"{name:22s} {desc}")
    return EXIT_OK


def _cmd_emit(args):
    report = RunReport.load(args.report)
    text = emit_table(report, args.format, args.out)
    if args.out is None:
        sys.stdout.write(text)
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    handler = {"run": _cmd_run, "list": _cmd_list, "emit": _cmd_emit}[args.verb]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
