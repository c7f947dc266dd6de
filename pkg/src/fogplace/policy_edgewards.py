"""Edgewards baseline: first-in-first-allocated placement along each client path.

Paths are processed gateway by gateway. Within a path, services go in
topological order to the lowest device that can host them, never below the
device of any predecessor. An instance already placed on the path by an
earlier path is reused even when a closer device has room.
"""

from __future__ import annotations

from .model import Scenario, available_capacity, service_demand
from .placement import INITIAL, SHIFTED, PlacementState


def run_edgewards(scenario: Scenario) -> PlacementState:
    state = PlacementState()
    topo = scenario.topology
    for gateway in topo.gateways:
        clients = scenario.gateway_clients(gateway)
        if not clients:
            continue
        path = scenario.client_path(clients[0])
        for app_id in sorted({c.app for c in clients}):
            app = scenario.apps[app_id]
            position: dict[int, int] = {}
            for s in app.topological_order:
                lowest = max((position[p] for p in app.predecessors[s]), default=0)
                merged = next((i for i in range(lowest, len(path)) if state.hosts(path[i], s)), None)
                if merged is not None:
                    position[s] = merged
                    continue
                for i in range(lowest, len(path)):
                    d = path[i]
                    if d == topo.cloud or service_demand(scenario, d, s) < available_capacity(scenario, state, d):
                        inst = state.allocate(app_id, s, d)
                        if i == 0:
                            state.log(inst, app_id, s, None, d, INITIAL)
                        else:
                            state.log(inst, app_id, s, gateway, d, SHIFTED)
                        position[s] = i
                        break
    return state
