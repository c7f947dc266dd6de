"""System model: devices, topology, applications, clients and rate accounting.

All types here are immutable once built. Derived quantities (paths to the
cloud, per-device request rates, closures) are computed lazily and cached on
the owning object, so a Scenario can be shared freely between evaluations.

Arithmetic is kept generic: if rates and demands are given as
``fractions.Fraction`` every derived rate and usage stays exact.
"""

from __future__ import annotations

import heapq
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Optional, Sequence

DeviceId = int
ServiceId = int
AppId = int
ClientId = int
InstanceId = int

#: effective capacity of the cloud provider
UNLIMITED = math.inf


class ScenarioError(ValueError):
    """Raised when a scenario (or one of its parts) violates the model."""


class TopologyError(ScenarioError):
    """Raised for disconnected or otherwise unusable topologies."""


@dataclass(frozen=True)
class Device:
    id: DeviceId
    cpu_capacity: float
    ram_capacity: float = 0.0
    uplink_latency: float = 0.0
    is_cloud: bool = False
    level: int = 0

    @property
    def effective_capacity(self):
        """Capacity used for placement decisions; unlimited for the cloud."""
        return UNLIMITED if self.is_cloud else self.cpu_capacity


@dataclass(frozen=True)
class Link:
    a: DeviceId
    b: DeviceId
    latency: float


@dataclass(frozen=True)
class Topology:
    """Undirected device graph with one cloud device and a set of gateways.

    ``ingress_latency`` is the latency of the client-to-gateway hop, only used
    when ingress traffic is explicitly requested by the flow engine.
    """

    devices: Mapping[DeviceId, Device]
    links: tuple[Link, ...]
    cloud: DeviceId
    gateways: tuple[DeviceId, ...]
    ingress_latency: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "devices", dict(sorted(self.devices.items())))
        object.__setattr__(self, "links", tuple(self.links))
        object.__setattr__(self, "gateways", tuple(sorted(self.gateways)))
        for did, dev in self.devices.items():
            if did != dev.id:
                raise TopologyError(f"device key {did} does not match id {dev.id}")
            if not dev.is_cloud and not dev.cpu_capacity > 0:
                raise TopologyError(f"device {did} needs a positive cpu capacity")
        clouds = [d.id for d in self.devices.values() if d.is_cloud]
        if clouds != [self.cloud]:
            raise TopologyError(f"exactly one cloud device expected, got {clouds}")
        for link in self.links:
            if link.a not in self.devices or link.b not in self.devices:
                raise TopologyError(f"link {link} references an unknown device")
            if link.a == link.b:
                raise TopologyError(f"self-loop link on device {link.a}")
            if link.latency < 0:
                raise TopologyError(f"negative latency on link {link}")
        for g in self.gateways:
            if g not in self.devices or g == self.cloud:
                raise TopologyError(f"gateway {g} must be a non-cloud device")
        missing = set(self.devices) - set(self._distance)
        if missing:
            raise TopologyError(f"devices {sorted(missing)} cannot reach the cloud")

    @cached_property
    def adjacency(self) -> dict[DeviceId, dict[DeviceId, float]]:
        adj: dict[DeviceId, dict[DeviceId, float]] = {d: {} for d in self.devices}
        for link in self.links:
            best = adj[link.a].get(link.b)
            if best is None or link.latency < best:
                adj[link.a][link.b] = link.latency
                adj[link.b][link.a] = link.latency
        return adj

    @cached_property
    def _distance(self) -> dict[DeviceId, Fraction]:
        # exact distances so that equal-latency ties are detected reliably
        dist = {self.cloud: Fraction(0)}
        heap = [(Fraction(0), self.cloud)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u]:
                continue
            for v, lat in self.adjacency[u].items():
                nd = d + Fraction(lat)
                if v not in dist or nd < dist[v]:
                    dist[v] = nd
                    heapq.heappush(heap, (nd, v))
        return dist

    @cached_property
    def _fathers(self) -> dict[DeviceId, DeviceId]:
        fathers = {}
        for u in self.devices:
            if u == self.cloud:
                continue
            du = self._distance[u]
            fathers[u] = min(
                v for v, lat in self.adjacency[u].items()
                if v in self._distance and self._distance[v] + Fraction(lat) == du
            )
        return fathers

    def distance_to_cloud(self, device: DeviceId) -> Fraction:
        return self._distance[device]

    def latency(self, a: DeviceId, b: DeviceId) -> float:
        """Latency of the direct link between two adjacent devices."""
        try:
            return self.adjacency[a][b]
        except KeyError:
            raise TopologyError(f"devices {a} and {b} are not adjacent") from None

    @cached_property
    def _paths(self) -> dict[DeviceId, tuple[DeviceId, ...]]:
        paths: dict[DeviceId, tuple[DeviceId, ...]] = {self.cloud: ()}

        def build(u):
            if u not in paths:
                f = self._fathers[u]
                paths[u] = (f,) + build(f)
            return paths[u]

        for u in sorted(self.devices, key=lambda d: self._distance[d]):
            build(u)
        return paths

    @cached_property
    def hop_levels(self) -> dict[DeviceId, int]:
        """Hop distance of each device from the gateways below it (gateway = 1)."""
        levels: dict[DeviceId, int] = {}
        for g in self.gateways:
            for pos, d in enumerate((g,) + self._paths[g]):
                levels[d] = min(levels.get(d, pos + 1), pos + 1)
        depth = max((len(self._paths[g]) for g in self.gateways), default=0)
        levels[self.cloud] = depth + 1
        return levels


def shortest_path_to_cloud(topology: Topology, device: DeviceId) -> tuple[DeviceId, ...]:
    """Minimum-latency path from ``device`` (exclusive) to the cloud (inclusive).

    Equal-latency alternatives are resolved towards the lexicographically
    smallest sequence of device ids.
    """
    if device not in topology.devices:
        raise TopologyError(f"unknown device {device}")
    return topology._paths[device]


def father(topology: Topology, device: DeviceId) -> DeviceId:
    if device == topology.cloud:
        raise ValueError("the cloud device has no father")
    return shortest_path_to_cloud(topology, device)[0]


@dataclass(frozen=True)
class LinkConfig:
    """Per-tier device and link parameters for generated tree topologies."""

    fog_cpu: float = 2800
    fog_ram: float = 4000
    fog_latency: float = 2.0
    cloud_cpu: float = 4480000
    cloud_ram: float = 4000000
    cloud_latency: float = 100.0
    ingress_latency: float = 2.0


def build_tree_topology(levels: int, children: int, link_cfg: Optional[LinkConfig] = None) -> Topology:
    """Complete ``children``-ary tree with ``levels`` fog levels under the cloud.

    Device ids are assigned breadth first from the cloud (id 0), so the
    gateways (bottom fog row) carry the largest ids.
    """
    if levels < 1 or children < 1:
        raise ValueError("levels and children must both be >= 1")
    cfg = link_cfg or LinkConfig()
    devices = {0: Device(0, cfg.cloud_cpu, cfg.cloud_ram, 0.0, True, levels + 1)}
    links = []
    row = [0]
    next_id = 1
    for depth in range(1, levels + 1):
        new_row = []
        latency = cfg.cloud_latency if depth == 1 else cfg.fog_latency
        for parent in row:
            for _ in range(children):
                devices[next_id] = Device(next_id, cfg.fog_cpu, cfg.fog_ram, latency, False,
                                          levels - depth + 1)
                links.append(Link(next_id, parent, latency))
                new_row.append(next_id)
                next_id += 1
        row = new_row
    return Topology(devices, tuple(links), 0, tuple(row), cfg.ingress_latency)


@dataclass(frozen=True)
class ServiceEdge:
    """Consumption relation ``source -> target``.

    ``cpu_demand`` is charged to ``target`` for every message that crosses
    the edge; ``selectivity`` is the number of messages per ``source`` invocation.
    """

    source: ServiceId
    target: ServiceId
    cpu_demand: float = 1000
    message_size: float = 10
    selectivity: float = 1

    def __post_init__(self):
        if self.source == self.target:
            raise ScenarioError(f"self edge on service {self.source}")
        if not self.cpu_demand > 0:
            raise ScenarioError(f"edge {self.source}->{self.target} needs cpu_demand > 0")
        if self.selectivity < 0:
            raise ScenarioError(f"edge {self.source}->{self.target} has negative selectivity")


@dataclass(frozen=True)
class AppModel:
    id: AppId
    services: tuple[ServiceId, ...]
    edges: tuple[ServiceEdge, ...]
    entry: ServiceId
    entry_cpu: float = 1000
    entry_message_size: float = 10
    name: str = ""
    service_names: Mapping[ServiceId, str] = field(default_factory=dict)
    loops: tuple[tuple[ServiceId, ...], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "services", tuple(sorted(self.services)))
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "service_names", dict(self.service_names))
        object.__setattr__(self, "loops", tuple(tuple(lp) for lp in self.loops))
        known = set(self.services)
        if len(known) != len(self.services):
            raise ScenarioError(f"app {self.id}: duplicate service ids")
        if self.entry not in known:
            raise ScenarioError(f"app {self.id}: entry {self.entry} is not a service")
        for e in self.edges:
            if e.source not in known or e.target not in known:
                raise ScenarioError(f"app {self.id}: edge {e.source}->{e.target} leaves the app")
        if len(self.topological_order) != len(self.services):
            raise ScenarioError(f"app {self.id}: service graph has a cycle")
        unreachable = known - self.closure(self.entry)
        if unreachable:
            raise ScenarioError(f"app {self.id}: services {sorted(unreachable)} unreachable from entry")
        for lp in self.loops:
            check_loop(self, lp)

    @cached_property
    def successors(self) -> dict[ServiceId, tuple[ServiceId, ...]]:
        succ = defaultdict(set)
        for e in self.edges:
            succ[e.source].add(e.target)
        return {s: tuple(sorted(succ[s])) for s in self.services}

    @cached_property
    def predecessors(self) -> dict[ServiceId, tuple[ServiceId, ...]]:
        pred = defaultdict(set)
        for e in self.edges:
            pred[e.target].add(e.source)
        return {s: tuple(sorted(pred[s])) for s in self.services}

    @cached_property
    def topological_order(self) -> tuple[ServiceId, ...]:
        """Kahn's order, smallest ready id first."""
        indeg = {s: len(self.predecessors.get(s, ())) for s in self.services}
        ready = [s for s, d in indeg.items() if d == 0]
        heapq.heapify(ready)
        order = []
        while ready:
            s = heapq.heappop(ready)
            order.append(s)
            for t in self.successors[s]:
                indeg[t] -= 1
                if indeg[t] == 0:
                    heapq.heappush(ready, t)
        return tuple(order)

    @cached_property
    def _closures(self) -> dict[ServiceId, frozenset[ServiceId]]:
        closures: dict[ServiceId, frozenset[ServiceId]] = {}
        for s in reversed(self.topological_order):
            reach = {s}
            for t in self.successors[s]:
                reach |= closures[t]
            closures[s] = frozenset(reach)
        return closures

    def closure(self, service: ServiceId) -> frozenset[ServiceId]:
        try:
            return self._closures[service]
        except KeyError:
            raise ScenarioError(f"service {service} is not part of app {self.id}") from None

    @cached_property
    def invocations(self) -> dict[ServiceId, float]:
        """Invocations of each service per request reaching the entry."""
        inv = {s: 0 for s in self.services}
        inv[self.entry] = 1
        for s in self.topological_order:
            for e in self.edges:
                if e.source == s:
                    inv[e.target] = inv[e.target] + inv[s] * e.selectivity
        return inv

    @cached_property
    def cpu_per_request(self) -> dict[ServiceId, float]:
        """Million instructions each service executes per entry request."""
        cpu = {s: 0 for s in self.services}
        cpu[self.entry] = self.entry_cpu
        for e in self.edges:
            cpu[e.target] = cpu[e.target] + self.invocations[e.source] * e.selectivity * e.cpu_demand
        return cpu

    def cpu_per_invocation(self, service: ServiceId):
        inv = self.invocations[service]
        if inv:
            return self.cpu_per_request[service] / inv
        incoming = [e.cpu_demand for e in self.edges if e.target == service]
        return sum(incoming) / len(incoming)

    def label(self, service: ServiceId) -> str:
        return self.service_names.get(service, str(service))

    def service_id(self, name: str) -> ServiceId:
        for sid, n in self.service_names.items():
            if n == name:
                return sid
        raise KeyError(f"app {self.id} has no service named {name!r}")


def check_loop(app: AppModel, services: Sequence[ServiceId]) -> None:
    if not services:
        raise ScenarioError(f"app {app.id}: empty loop")
    pairs = {(e.source, e.target) for e in app.edges}
    for a, b in zip(services, services[1:]):
        if (a, b) not in pairs:
            raise ScenarioError(f"app {app.id}: loop step {a}->{b} is not an edge")


def transitive_closure(app: AppModel, service: ServiceId) -> frozenset[ServiceId]:
    """Services executed when ``service`` is requested, ``service`` included."""
    return app.closure(service)


@dataclass(frozen=True)
class Client:
    id: ClientId
    gateway: DeviceId
    app: AppId
    entry_rate: float


@dataclass(frozen=True)
class Scenario:
    topology: Topology
    apps: Mapping[AppId, AppModel]
    clients: tuple[Client, ...]
    simulation_time: float = 10000.0
    name: str = ""
    params: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.apps, Mapping):
            object.__setattr__(self, "apps", {a.id: a for a in self.apps})
        object.__setattr__(self, "apps", dict(sorted(self.apps.items())))
        object.__setattr__(self, "clients", tuple(sorted(self.clients, key=lambda c: c.id)))
        object.__setattr__(self, "params", dict(self.params))
        if not self.simulation_time > 0:
            raise ScenarioError("simulation time must be positive")
        owners: dict[ServiceId, AppId] = {}
        for aid, app in self.apps.items():
            if aid != app.id:
                raise ScenarioError(f"app key {aid} does not match id {app.id}")
            for s in app.services:
                if s in owners:
                    raise ScenarioError(f"service id {s} used by apps {owners[s]} and {aid}")
                owners[s] = aid
        ids = [c.id for c in self.clients]
        if len(set(ids)) != len(ids):
            raise ScenarioError("duplicate client ids")
        gateways = set(self.topology.gateways)
        for c in self.clients:
            if c.app not in self.apps:
                raise ScenarioError(f"client {c.id} requests unknown app {c.app}")
            if c.gateway not in gateways:
                raise ScenarioError(f"client {c.id} attached to non-gateway device {c.gateway}")
            if c.entry_rate < 0:
                raise ScenarioError(f"client {c.id} has a negative rate")

    @cached_property
    def service_app(self) -> dict[ServiceId, AppId]:
        return {s: a.id for a in self.apps.values() for s in a.services}

    def app_of(self, service: ServiceId) -> AppModel:
        try:
            return self.apps[self.service_app[service]]
        except KeyError:
            raise ScenarioError(f"unknown service {service}") from None

    @cached_property
    def client_map(self) -> dict[ClientId, Client]:
        return {c.id: c for c in self.clients}

    def client(self, cid: ClientId) -> Client:
        try:
            return self.client_map[cid]
        except KeyError:
            raise ScenarioError(f"unknown client {cid}") from None

    def client_path(self, client: Client | ClientId) -> tuple[DeviceId, ...]:
        """Gateway first, cloud last."""
        c = client if isinstance(client, Client) else self.client(client)
        return (c.gateway,) + shortest_path_to_cloud(self.topology, c.gateway)

    def client_rate(self, client: Client, service: ServiceId):
        app = self.apps[client.app]
        if service not in app.invocations:
            return 0
        return client.entry_rate * app.invocations[service]

    @cached_property
    def _entry_rates(self) -> dict[tuple[DeviceId, AppId], float]:
        rates: dict[tuple[DeviceId, AppId], float] = {}
        for c in self.clients:
            for d in self.client_path(c):
                key = (d, c.app)
                rates[key] = rates.get(key, 0) + c.entry_rate
        return rates

    def entry_rate_at(self, device: DeviceId, app: AppId):
        """Entry requests per ms of ``app`` from clients whose path includes ``device``."""
        return self._entry_rates.get((device, app), 0)

    def gateway_clients(self, gateway: DeviceId) -> list[Client]:
        return [c for c in self.clients if c.gateway == gateway]


def device_request_rate(scenario: Scenario, device: DeviceId, service: ServiceId):
    """Requests per ms for ``service`` arriving at ``device`` (aggregated over clients)."""
    app = scenario.app_of(service)
    return app.invocations[service] * scenario.entry_rate_at(device, app.id)


def service_demand(scenario: Scenario, device: DeviceId, service: ServiceId):
    """CPU load (MI per ms) that one instance of ``service`` puts on ``device``."""
    app = scenario.app_of(service)
    return app.cpu_per_request[service] * scenario.entry_rate_at(device, app.id)


@dataclass(frozen=True)
class ResourceUsage:
    cpu_used: float = 0

    def __post_init__(self):
        if self.cpu_used < 0:
            raise ValueError("resource usage cannot be negative")


def resource_usage(scenario: Scenario, placement, device: DeviceId) -> ResourceUsage:
    return ResourceUsage(sum(
        (service_demand(scenario, device, s) for s in placement.services_on(device)), 0))


def available_capacity(scenario: Scenario, placement, device: DeviceId):
    dev = scenario.topology.devices[device]
    return dev.effective_capacity - resource_usage(scenario, placement, device).cpu_used


def iter_service_pairs(scenario: Scenario) -> Iterable[tuple[Client, ServiceId]]:
    """Every (client, service) pair a client needs, in deterministic order."""
    for c in scenario.clients:
        app = scenario.apps[c.app]
        for s in sorted(app.closure(app.entry)):
            yield c, s
