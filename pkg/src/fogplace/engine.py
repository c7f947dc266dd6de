"""Steady-state request flow through a placement.

Each client request enters at its gateway and is served by the first
instance found on the way to the cloud. Every invocation edge of the app
then travels between the devices resolving its two endpoints, and those hops
are recorded as link transfers. There is no queueing: processing uses the
full device CPU and every transfer costs only its link latency.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Optional

from .model import AppId, Client, ClientId, DeviceId, InstanceId, Scenario, ServiceId, check_loop
from .placement import PlacementState


class CoverageError(RuntimeError):
    """A client needs a service that has no instance on its path."""


@dataclass(frozen=True)
class LinkTransfer:
    source: Optional[DeviceId]  # None is the client side of the ingress hop
    target: DeviceId
    latency: float
    message_size: float
    rate: float
    client: ClientId = -1
    app: AppId = -1
    from_service: Optional[ServiceId] = None
    to_service: ServiceId = -1

    def key(self):
        return (self.source, self.target, self.latency, self.message_size, self.rate)


@dataclass(frozen=True)
class LoopSpec:
    app: AppId
    services: tuple[ServiceId, ...]


@dataclass
class FlowTrace:
    link_transfers: list[LinkTransfer] = field(default_factory=list)
    loop_latencies: dict[tuple[AppId, int], float] = field(default_factory=dict)
    per_instance_load: dict[InstanceId, float] = field(default_factory=dict)


TRACE_COLUMNS = ("client", "app", "from_service", "to_service", "from_device", "to_device",
                 "latency_ms", "bytes", "rate_per_ms")


def resolve_instance(scenario: Scenario, placement: PlacementState, client: ClientId,
                     service: ServiceId) -> DeviceId:
    """First device on the client's gateway-to-cloud path hosting ``service``."""
    for d in scenario.client_path(client):
        if placement.hosts(d, service):
            return d
    raise CoverageError(f"client {client} has no instance of service {service} on its path")


def _resolve_all(scenario, placement, c: Client):
    app = scenario.apps[c.app]
    path = scenario.client_path(c)
    position = {d: i for i, d in enumerate(path)}
    resolved = {s: position[resolve_instance(scenario, placement, c.id, s)]
                for s in sorted(app.closure(app.entry))}
    return path, resolved


def _segment(path, i, j):
    step = 1 if j >= i else -1
    return [(path[k], path[k + step]) for k in range(i, j, step)]


def _path_latency(scenario, path, i, j):
    return sum((scenario.topology.latency(a, b) for a, b in _segment(path, i, j)), 0)


def simulate(scenario: Scenario, placement: PlacementState, include_ingress: bool = False,
             mirror_responses: bool = False) -> FlowTrace:
    trace = FlowTrace()
    topo = scenario.topology
    for c in scenario.clients:
        app = scenario.apps[c.app]
        path, resolved = _resolve_all(scenario, placement, c)

        def transfer(i, j, size, rate, src_service, dst_service):
            hops = _segment(path, i, j)
            if mirror_responses:
                hops = hops + _segment(path, j, i)
            for a, b in hops:
                trace.link_transfers.append(LinkTransfer(
                    a, b, topo.latency(a, b), size, rate, c.id, app.id, src_service, dst_service))

        if include_ingress:
            trace.link_transfers.append(LinkTransfer(
                None, c.gateway, topo.ingress_latency, app.entry_message_size, c.entry_rate,
                c.id, app.id, None, app.entry))
        transfer(0, resolved[app.entry], app.entry_message_size, c.entry_rate, None, app.entry)
        for e in app.edges:
            rate = c.entry_rate * app.invocations[e.source] * e.selectivity
            transfer(resolved[e.source], resolved[e.target], e.message_size, rate, e.source, e.target)

        for s, pos in resolved.items():
            inst = placement.instance_at(path[pos], s)
            trace.per_instance_load[inst] = trace.per_instance_load.get(inst, 0) + scenario.client_rate(c, s)

    for app in scenario.apps.values():
        for k, services in enumerate(app.loops):
            trace.loop_latencies[(app.id, k)] = loop_latency(
                scenario, placement, None, LoopSpec(app.id, services))
    return trace


def loop_latency(scenario: Scenario, placement: PlacementState, trace: Optional[FlowTrace],
                 loop: LoopSpec) -> float:
    """Rate-weighted mean time from the first loop service's arrival to the last one's end.

    ``trace`` is accepted for symmetry with the other metrics; the value is
    recomputed from the placement.
    """
    app = scenario.apps[loop.app]
    check_loop(app, loop.services)
    devices = scenario.topology.devices
    total = weight = 0
    for c in scenario.clients:
        if c.app != app.id:
            continue
        path, resolved = _resolve_all(scenario, placement, c)
        t = 0
        for s in loop.services:
            t += app.cpu_per_invocation(s) / devices[path[resolved[s]]].cpu_capacity
        for a, b in zip(loop.services, loop.services[1:]):
            t += _path_latency(scenario, path, resolved[a], resolved[b])
        total += c.entry_rate * t
        weight += c.entry_rate
    return total / weight if weight else 0.0


def network_usage(trace: FlowTrace, simulation_time: float) -> float:
    """Sum of latency times bytes over every request sent, per ms of simulated time."""
    if not simulation_time > 0:
        raise ValueError("simulation time must be positive")
    return sum((t.latency * t.message_size * (t.rate * simulation_time)
                for t in trace.link_transfers), 0) / simulation_time


def trace_csv(trace: FlowTrace) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for t in trace.link_transfers:
        writer.writerow([t.client, t.app, "" if t.from_service is None else t.from_service,
                         t.to_service, "client" if t.source is None else t.source, t.target,
                         repr(float(t.latency)), repr(float(t.message_size)), repr(float(t.rate))])
    return buf.getvalue()


def default_loops(scenario: Scenario) -> list[LoopSpec]:
    return [LoopSpec(a.id, a.loops[0]) for a in scenario.apps.values() if a.loops]

