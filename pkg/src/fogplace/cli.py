"""Command line entry point.

    fogplace run --scenario users-2_apps-2_levels-2_children-2 --policy both --out out/
    fogplace sweep --axis users --policy both --out out/
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path

from .engine import CoverageError, trace_csv
from .io import ScenarioFileError, load_scenario
from .metrics import reports_csv, summary_csv
from .model import ScenarioError
from .placement import migration_log_csv
from .runner import POLICY_NAMES, EvalFlags, evaluate, evaluate_reports
from .scenarios import AXES, DEFAULT_FIXED, DEFAULT_VALUES, SweepSpec, generate_grid, make_cell, parse_cell_name

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INTERNAL = 3


def _policies(choice: str) -> tuple[str, ...]:
    return POLICY_NAMES if choice == "both" else (choice,)


def _flags(args) -> EvalFlags:
    return EvalFlags(args.include_ingress, args.mirror_responses, args.literal_denominator, args.sar_order)


def resolve_scenario(source: str):
    params = parse_cell_name(source)
    if params is not None and not Path(source).exists():
        return make_cell(**params)
    return load_scenario(source)


def _summary_line(report) -> str:
    return (f"{report.policy:<10} {report.cell or '-'}: weighted_hop={report.weighted_hop:.4f} "
            f"arithmetic_hop={report.arithmetic_hop:.4f} network_usage={report.network_usage:.4f} "
            f"latency_highest={report.latency_highest:.4f} migrations={report.migrations}")


def cmd_run(args) -> int:
    scenario = resolve_scenario(args.scenario)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    flags = _flags(args)
    reports = []
    for policy in _policies(args.policy):
        ev = evaluate(scenario, policy, flags)
        (out / f"migrations_{policy}.csv").write_text(migration_log_csv(ev.placement))
        (out / f"trace_{policy}.csv").write_text(trace_csv(ev.trace))
        reports.append(ev.report)
        print(_summary_line(ev.report))
    (out / "report.csv").write_text(reports_csv(reports))
    return EXIT_OK


def _parse_fixed(items) -> dict[str, int]:
    fixed = dict(DEFAULT_FIXED)
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep or key not in AXES or not value.isdigit():
            raise ScenarioError(f"bad --fixed entry {item!r}; expected e.g. users=2")
        fixed[key] = int(value)
    return fixed


def cmd_sweep(args) -> int:
    fixed = _parse_fixed(args.fixed)
    values = tuple(int(v) for v in args.values.split(",")) if args.values else DEFAULT_VALUES
    axes = AXES if args.axis == "all" else (args.axis,)
    scenarios = []
    for axis in axes:
        scenarios.extend(generate_grid(SweepSpec(axis, values, fixed)))
    policies = _policies(args.policy)
    work = partial(evaluate_reports, policies=policies, flags=_flags(args))
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(work, scenarios))
    else:
        results = [work(sc) for sc in scenarios]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    flat = [r for rs in results for r in rs]
    (out / "report.csv").write_text(reports_csv(flat))
    if len(policies) == 2:
        (out / "summary.csv").write_text(summary_csv((rs[0], rs[1]) for rs in results))
    for r in flat:
        print(_summary_line(r))
    return EXIT_OK


def _common(p):
    p.add_argument("--policy", choices=("pop", "edgewards", "both"), default="both")
    p.add_argument("--out", default="out", help="output directory (created if missing)")
    p.add_argument("--include-ingress", action="store_true",
                   help="count the client-to-gateway hop in network usage")
    p.add_argument("--mirror-responses", action="store_true",
                   help="send a response back along every request hop")
    p.add_argument("--literal-denominator", action="store_true",
                   help="weight hop counts per allocated instance with device-level rates")
    p.add_argument("--sar-order", choices=("rate", "topological"), default="rate",
                   help="order in which a connecting client's requests are placed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fogplace", description="Fog service placement simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="evaluate one scenario")
    run.add_argument("--scenario", required=True, help="scenario JSON file or grid cell name")
    _common(run)
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="evaluate one axis (or all four) of the experiment grid")
    sweep.add_argument("--axis", choices=AXES + ("all",), required=True)
    sweep.add_argument("--fixed", nargs="*", metavar="PARAM=N",
                       help="held-constant parameters, default users=2 apps=2 levels=2 children=2")
    sweep.add_argument("--values", help="comma separated axis values, default 1,2,3,4,5")
    sweep.add_argument("--jobs", type=int, default=1, help="worker processes")
    _common(sweep)
    sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CoverageError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (ScenarioFileError, ScenarioError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
