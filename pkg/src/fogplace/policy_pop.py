"""Decentralized popularity-based placement.

Every device runs the same local rule on each incoming Service Allocation
Request (SAR): keep the service if it fits, otherwise evict less requested
groups of interoperating services, otherwise pass the request to its father.
Evicted services are re-requested at the father, so everything climbs the
shortest path towards the cloud, where the request is always accepted.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from .model import (
    AppId, ClientId, DeviceId, InstanceId, Scenario, ServiceId,
    available_capacity, device_request_rate, father, service_demand,
)
from .placement import EVICTED, INITIAL, SHIFTED, PlacementState

SAR_ORDERS = ("rate", "topological")


@dataclass(frozen=True)
class ServiceAllocationRequest:
    service: ServiceId
    app: AppId
    target_device: DeviceId
    originating_client: Optional[ClientId]
    origin_device: DeviceId
    trigger: str = INITIAL
    instance: Optional[InstanceId] = None


SAR = ServiceAllocationRequest


@dataclass(frozen=True)
class MigrationCandidateSet:
    subsets: tuple[tuple[frozenset[ServiceId], float], ...]

    def member_sets(self) -> set[frozenset[ServiceId]]:
        return {members for members, _ in self.subsets}


def subset_rate(scenario: Scenario, device: DeviceId, subset) -> float:
    return sum((device_request_rate(scenario, device, s) for s in sorted(subset)), 0)


def _candidate_subsets(scenario, device, pool):
    seen = {}
    for s in sorted(pool):
        members = frozenset(scenario.app_of(s).closure(s) & pool)
        if members not in seen:
            seen[members] = subset_rate(scenario, device, members)
    return sorted(seen.items(), key=lambda kv: (kv[1], len(kv[0]), sorted(kv[0])))


def migration_candidates(scenario: Scenario, placement: PlacementState, device: DeviceId,
                         app: Optional[AppId] = None) -> MigrationCandidateSet:
    """Subsets ``alloc(device) & closure(s)`` for every allocated ``s``, ascending by rate.

    Equal member sets are collapsed. ``app`` restricts the subsets to one
    application; the placement rule itself always looks at every app.
    """
    pool = set(placement.services_on(device))
    if app is not None:
        pool = {s for s in pool if scenario.service_app[s] == app}
    return MigrationCandidateSet(tuple(_candidate_subsets(scenario, device, pool)))


def _commit(scenario, state, sar, device):
    inst = state.allocate(sar.app, sar.service, device, sar.instance)
    if sar.trigger == EVICTED:
        state.log(inst, sar.app, sar.service, sar.origin_device, device, EVICTED)
    elif device == sar.origin_device:
        state.log(inst, sar.app, sar.service, None, device, INITIAL)
    else:
        state.log(inst, sar.app, sar.service, sar.origin_device, device, SHIFTED)


def _shift(scenario, state, sar):
    up = father(scenario.topology, sar.target_device)
    return place(scenario, state, replace(sar, target_device=up))


def place(scenario: Scenario, placement: PlacementState, sar: ServiceAllocationRequest) -> PlacementState:
    """Process one SAR at ``sar.target_device``, recursing towards the cloud."""
    state = placement
    topo = scenario.topology
    device, service = sar.target_device, sar.service
    if device not in topo.devices:
        raise ValueError(f"unknown device {device}")
    state.sars_processed += 1

    if state.hosts(device, service):
        if sar.trigger == EVICTED:
            # the evicted instance merges into the one already running here
            state.log(sar.instance, sar.app, service, sar.origin_device, device, EVICTED)
        return state

    if device == topo.cloud:
        _commit(scenario, state, sar, device)
        return state

    demand = service_demand(scenario, device, service)
    available = available_capacity(scenario, state, device)
    if demand < available:
        _commit(scenario, state, sar, device)
        return state
    if demand >= topo.devices[device].cpu_capacity:
        return _shift(scenario, state, sar)

    to_free = demand - available
    rate = device_request_rate(scenario, device, service)
    pool = set(state.services_on(device))
    marked: list[ServiceId] = []
    while to_free > 0:
        subsets = _candidate_subsets(scenario, device, pool)
        if not subsets:
            break
        members, members_rate = subsets[0]
        if not rate > members_rate:
            break
        ordered = sorted(members)
        marked.extend(ordered)
        pool -= members
        for s in ordered:
            to_free -= service_demand(scenario, device, s)

    if to_free > 0:
        return _shift(scenario, state, sar)

    up = father(topo, device)
    evicted = []
    for s in marked:
        inst = state.instance_at(device, s)
        app, _, _ = state.deallocate(inst)
        evicted.append(SAR(s, app, up, sar.originating_client, device, EVICTED, inst))
    for req in evicted:
        state.sars_issued += 1
        place(scenario, state, req)
    _commit(scenario, state, sar, device)
    return state


def _sar_sequence(scenario, client, order):
    app = scenario.apps[client.app]
    services = app.closure(app.entry)
    if order == "rate":
        return sorted(services, key=lambda s: (-scenario.client_rate(client, s), s))
    if order == "topological":
        return [s for s in app.topological_order if s in services]
    raise ValueError(f"unknown SAR order {order!r}; expected one of {SAR_ORDERS}")


def on_client_connect(scenario: Scenario, placement: PlacementState, client: ClientId,
                      order: str = "rate") -> PlacementState:
    """Issue one SAR per service the client needs, at the client's gateway.

    Services that already have an instance on the client's path are not
    requested again, which also makes reconnecting a no-op.
    """
    c = scenario.client(client)
    path = scenario.client_path(c)
    for s in _sar_sequence(scenario, c, order):
        if any(placement.hosts(d, s) for d in path):
            continue
        placement.sars_issued += 1
        place(scenario, placement, SAR(s, c.app, c.gateway, c.id, c.gateway))
    return placement


def run_pop(scenario: Scenario, order: str = "rate") -> PlacementState:
    state = PlacementState()
    for c in scenario.clients:
        on_client_connect(scenario, state, c.id, order)
    return state
