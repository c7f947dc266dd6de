"""Glue between policies, the flow engine and the metrics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .engine import FlowTrace, simulate
from .metrics import MetricsReport, assemble_report
from .model import Scenario
from .placement import PlacementState
from .policy_edgewards import run_edgewards
from .policy_pop import run_pop

POLICY_NAMES = ("pop", "edgewards")


@dataclass(frozen=True)
class EvalFlags:
    include_ingress: bool = False
    mirror_responses: bool = False
    literal_denominator: bool = False
    sar_order: str = "rate"


@dataclass
class Evaluation:
    policy: str
    placement: PlacementState
    trace: FlowTrace
    report: MetricsReport


def policy_runner(name: str, flags: EvalFlags = EvalFlags()) -> Callable[[Scenario], PlacementState]:
    if name == "pop":
        return lambda sc: run_pop(sc, flags.sar_order)
    if name == "edgewards":
        return run_edgewards
    raise ValueError(f"unknown policy {name!r}; expected one of {POLICY_NAMES}")


def evaluate(scenario: Scenario, policy: str, flags: EvalFlags = EvalFlags()) -> Evaluation:
    placement = policy_runner(policy, flags)(scenario)
    trace = simulate(scenario, placement, flags.include_ingress, flags.mirror_responses)
    report = assemble_report(scenario, placement, trace, policy=policy,
                             literal_denominator=flags.literal_denominator)
    return Evaluation(policy, placement, trace, report)


def evaluate_reports(scenario: Scenario, policies=POLICY_NAMES, flags: EvalFlags = EvalFlags()
                     ) -> list[MetricsReport]:
    """Only the reports, so results pickle cheaply across worker processes."""
    return [evaluate(scenario, p, flags).report for p in policies]
