"""Comparison metrics: hop counts, migrations and the per-run report."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .engine import FlowTrace, LoopSpec, default_loops, loop_latency, network_usage, resolve_instance
from .model import AppId, Scenario, device_request_rate, iter_service_pairs
from .placement import EVICTED, SHIFTED, PlacementState


def _pair_hops(scenario, placement):
    for c, s in iter_service_pairs(scenario):
        d = resolve_instance(scenario, placement, c.id, s)
        yield scenario.client_rate(c, s), scenario.client_path(c).index(d) + 1


def weighted_hop_count(scenario: Scenario, placement: PlacementState,
                       literal_denominator: bool = False) -> float:
    """Request-rate weighted mean hop distance between clients and their serving instances.

    With ``literal_denominator`` every allocated instance is weighted by the
    rate its device sees for the service, and its hop is the device's level
    above the gateways.
    """
    if literal_denominator:
        levels = scenario.topology.hop_levels
        weighted = []
        for inst, d in sorted(placement.allocations.items()):
            _, s = placement.instance_service[inst]
            weighted.append((device_request_rate(scenario, d, s), levels.get(d, 1)))
    else:
        weighted = list(_pair_hops(scenario, placement))
    total = sum((w for w, _ in weighted), 0)
    if not total:
        return 0.0
    return sum((w * h for w, h in weighted), 0) / total


def arithmetic_hop_count(scenario: Scenario, placement: PlacementState) -> float:
    hops = [h for _, h in _pair_hops(scenario, placement)]
    return sum(hops) / len(hops) if hops else 0.0


def migration_count(placement: PlacementState) -> int:
    return sum(1 for m in placement.migration_log if m.trigger in (EVICTED, SHIFTED))


def app_total_rates(scenario: Scenario) -> dict[AppId, float]:
    rates = {a: 0 for a in scenario.apps}
    for c in scenario.clients:
        rates[c.app] += c.entry_rate
    return rates


@dataclass
class MetricsReport:
    weighted_hop: float = 0.0
    arithmetic_hop: float = 0.0
    network_usage: float = 0.0
    loop_latency_per_app: dict[AppId, float] = field(default_factory=dict)
    migrations: int = 0
    scenario_params: dict = field(default_factory=dict)
    policy: str = ""
    cell: str = ""
    app_rates: dict[AppId, float] = field(default_factory=dict)

    def _by_rate(self, highest):
        requested = {a: r for a, r in self.app_rates.items() if r > 0 and a in self.loop_latency_per_app}
        if not requested:
            return 0.0
        pick = (max if highest else min)(requested, key=lambda a: (requested[a], -a if highest else a))
        return self.loop_latency_per_app[pick]

    @property
    def latency_highest(self) -> float:
        """Loop latency of the most requested app."""
        return self._by_rate(True)

    @property
    def latency_lowest(self) -> float:
        return self._by_rate(False)


def assemble_report(scenario: Scenario, placement: PlacementState, trace: FlowTrace,
                    loops: Optional[Iterable[LoopSpec]] = None, policy: str = "",
                    literal_denominator: bool = False) -> MetricsReport:
    loops = default_loops(scenario) if loops is None else list(loops)
    latencies: dict[AppId, float] = {}
    for lp in loops:
        latencies.setdefault(lp.app, loop_latency(scenario, placement, trace, lp))
    return MetricsReport(
        weighted_hop=weighted_hop_count(scenario, placement, literal_denominator),
        arithmetic_hop=arithmetic_hop_count(scenario, placement),
        network_usage=network_usage(trace, scenario.simulation_time),
        loop_latency_per_app=latencies,
        migrations=migration_count(placement),
        scenario_params=dict(scenario.params),
        policy=policy,
        cell=scenario.name,
        app_rates=app_total_rates(scenario),
    )


PARAM_COLUMNS = ("users", "apps", "levels", "children")
REPORT_COLUMNS = ("cell", "policy") + PARAM_COLUMNS + (
    "weighted_hop", "arithmetic_hop", "network_usage", "latency_highest", "latency_lowest",
    "migrations", "loop_latencies")


def _fmt(x) -> str:
    return repr(float(x))


def report_row(report: MetricsReport) -> dict[str, str]:
    row = {"cell": report.cell, "policy": report.policy}
    for p in PARAM_COLUMNS:
        v = report.scenario_params.get(p)
        row[p] = "" if v is None else str(v)
    row.update(
        weighted_hop=_fmt(report.weighted_hop),
        arithmetic_hop=_fmt(report.arithmetic_hop),
        network_usage=_fmt(report.network_usage),
        latency_highest=_fmt(report.latency_highest),
        latency_lowest=_fmt(report.latency_lowest),
        migrations=str(report.migrations),
        loop_latencies=";".join(f"{a}:{_fmt(v)}" for a, v in sorted(report.loop_latency_per_app.items())),
    )
    return row


def reports_csv(reports: Iterable[MetricsReport]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=REPORT_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in reports:
        writer.writerow(report_row(r))
    return buf.getvalue()


SUMMARY_COLUMNS = ("cell",) + PARAM_COLUMNS + (
    "weighted_hop_ratio", "arithmetic_hop_ratio", "network_usage_ratio",
    "latency_highest_ratio", "latency_lowest_ratio", "migrations_pop", "migrations_edgewards")


def _ratio(a, b):
    return _fmt(a / b) if b else ("1.0" if a == b else "inf")


def summary_csv(pairs: Iterable[tuple[MetricsReport, MetricsReport]]) -> str:
    """Edgewards over Pop ratios per cell; values above 1 favour Pop."""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SUMMARY_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for pop, edge in pairs:
        row: Mapping[str, str] = {
            "cell": pop.cell,
            **{p: str(pop.scenario_params.get(p, "")) for p in PARAM_COLUMNS},
            "weighted_hop_ratio": _ratio(edge.weighted_hop, pop.weighted_hop),
            "arithmetic_hop_ratio": _ratio(edge.arithmetic_hop, pop.arithmetic_hop),
            "network_usage_ratio": _ratio(edge.network_usage, pop.network_usage),
            "latency_highest_ratio": _ratio(edge.latency_highest, pop.latency_highest),
            "latency_lowest_ratio": _ratio(edge.latency_lowest, pop.latency_lowest),
            "migrations_pop": str(pop.migrations),
            "migrations_edgewards": str(edge.migrations),
        }
        writer.writerow(row)
    return buf.getvalue()
