"""Fixture builders shared by the test modules."""

import random
from fractions import Fraction

from fogplace.model import (
    AppModel, Client, Device, Link, Scenario, ServiceEdge, Topology, resource_usage,
)


def chain_topology(caps, latencies=None, cloud_cpu=1000):
    """Gateway id 1 at the bottom, cloud id 0 on top, fog devices in between.

    ``caps[0]`` is the gateway capacity, ``caps[-1]`` the device under the cloud.
    """
    n = len(caps)
    latencies = latencies or [2] * n
    devices = {0: Device(0, cloud_cpu, is_cloud=True)}
    links = []
    for k, cap in enumerate(caps):
        did = k + 1
        devices[did] = Device(did, cap)
        up = did + 1 if k + 1 < n else 0
        links.append(Link(did, up, latencies[k]))
    return Topology(devices, tuple(links), 0, (1,))


def six_service_app(app_id=0, offset=0, cpu=10):
    """Six-service app whose closures reproduce the worked migration example."""
    s = [offset + i for i in range(1, 7)]
    pairs = [(0, 1), (0, 2), (1, 3), (3, 5), (2, 4), (4, 5)]
    edges = tuple(ServiceEdge(s[a], s[b], cpu, 10, 1) for a, b in pairs)
    names = {sid: f"S{i + 1}" for i, sid in enumerate(s)}
    return AppModel(app_id, tuple(s), edges, s[0], entry_cpu=cpu, service_names=names)


def linear_app(app_id, first_service, n, cpu=1000, size=10, selectivity=1):
    ids = tuple(range(first_service, first_service + n))
    edges = tuple(ServiceEdge(a, b, cpu, size, selectivity) for a, b in zip(ids, ids[1:]))
    return AppModel(app_id, ids, edges, ids[0], entry_cpu=cpu, entry_message_size=size,
                    loops=(ids,))


def single_app(app_id, service, cpu=1000):
    return AppModel(app_id, (service,), (), service, entry_cpu=cpu)


def random_dag_app(rng, app_id, first_service, max_services=8, exact=False):
    n = rng.randint(1, max_services)
    ids = list(range(first_service, first_service + n))
    num = (lambda lo, hi: Fraction(rng.randint(lo, hi))) if exact else (lambda lo, hi: rng.randint(lo, hi))
    edges = []
    for j in range(1, n):
        parents = {rng.randrange(j)}
        for i in range(j):
            if rng.random() < 0.25:
                parents.add(i)
        for i in sorted(parents):
            sel = Fraction(rng.choice([1, 1, 1, 2, 3]), rng.choice([1, 2])) if exact else rng.choice([0.5, 1, 1, 1, 2])
            edges.append(ServiceEdge(ids[i], ids[j], num(1, 20), num(1, 50), sel))
    return AppModel(app_id, tuple(ids), tuple(edges), ids[0], entry_cpu=num(1, 20),
                    entry_message_size=num(1, 50))


def random_tree_topology(rng, max_levels=4, max_children=3, exact=False):
    """Random (not necessarily complete) tree; leaves at the deepest row are gateways."""
    levels = rng.randint(1, max_levels)
    devices = {0: Device(0, 10 ** 6, is_cloud=True, level=levels + 1)}
    links = []
    row = [0]
    nid = 1
    for depth in range(1, levels + 1):
        new_row = []
        for parent in row:
            for _ in range(rng.randint(1, max_children) if depth > 1 else rng.randint(1, 2)):
                cap = rng.randint(20, 300)
                devices[nid] = Device(nid, Fraction(cap) if exact else cap, level=levels - depth + 1)
                lat = rng.choice([1, 2, 5]) if depth > 1 else rng.choice([50, 100])
                links.append(Link(nid, parent, Fraction(lat) if exact else lat))
                new_row.append(nid)
                nid += 1
        row = new_row
    return Topology(devices, tuple(links), 0, tuple(row))


def random_scenario(seed, max_levels=4, max_services=8, max_apps=3, max_clients=6, exact=False,
                    topology=None):
    rng = random.Random(seed)
    topo = topology or random_tree_topology(rng, max_levels, exact=exact)
    apps = {}
    nxt = 0
    for a in range(rng.randint(1, max_apps)):
        app = random_dag_app(rng, a, nxt, max_services, exact)
        apps[a] = app
        nxt += len(app.services)
    clients = []
    for cid in range(rng.randint(0, max_clients)):
        rate = Fraction(rng.randint(1, 10), rng.choice([1, 2, 4])) if exact else rng.choice([0.5, 1, 2, 3])
        clients.append(Client(cid, rng.choice(topo.gateways), rng.choice(list(apps)), rate))
    return Scenario(topo, apps, tuple(clients), 1000)


def check_invariants(sc, state):
    topo = sc.topology
    for d, dev in topo.devices.items():
        if d != topo.cloud:
            assert resource_usage(sc, state, d).cpu_used <= dev.cpu_capacity
    for c in sc.clients:
        path = sc.client_path(c)
        app = sc.apps[c.app]
        for s in app.closure(app.entry):
            assert any(state.hosts(d, s) for d in path)
