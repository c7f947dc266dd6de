from fractions import Fraction

import pytest

from fogplace.model import Client, Device, Link, Scenario, Topology, build_tree_topology
from fogplace.placement import INITIAL, SHIFTED
from fogplace.policy_edgewards import run_edgewards
from fogplace.policy_pop import run_pop
from fogplace.scenarios import sock_shop

import helpers
import oracles
from helpers import check_invariants


def two_gateway_topology(left_cap, right_cap, mid_cap=1000):
    devices = {0: Device(0, 10 ** 6, is_cloud=True), 1: Device(1, mid_cap),
               2: Device(2, left_cap), 3: Device(3, right_cap)}
    links = (Link(1, 0, 100), Link(2, 1, 2), Link(3, 1, 2))
    return Topology(devices, links, 0, (2, 3))


def test_single_path_all_at_gateway():
    topo = build_tree_topology(2, 2)
    g = topo.gateways[0]
    sc = Scenario(topo, {0: helpers.linear_app(0, 0, 4)}, (Client(0, g, 0, 0.1),))
    state = run_edgewards(sc)
    assert state.services_on(g) == [0, 1, 2, 3]
    assert all(m.trigger == INITIAL for m in state.migration_log)


def test_saturated_gateway_overflows_one_level():
    topo = helpers.chain_topology([250, 1000])
    sc = Scenario(topo, {0: helpers.linear_app(0, 0, 3)}, (Client(0, 1, 0, Fraction(1, 10)),))
    state = run_edgewards(sc)
    assert state.services_on(1) == [0, 1]
    assert state.services_on(2) == [2]
    assert [(m.service, m.source, m.target, m.trigger) for m in state.migration_log
            if m.trigger == SHIFTED] == [(2, 1, 2, SHIFTED)]


def test_downstream_never_below_upstream():
    # the entry does not fit at the gateway, so nothing after it may stay there
    topo = helpers.chain_topology([150, 1000])
    app = helpers.linear_app(0, 0, 3)
    app = type(app)(0, app.services, app.edges, 0, entry_cpu=2000, loops=app.loops)
    sc = Scenario(topo, {0: app}, (Client(0, 1, 0, Fraction(1, 10)),))
    state = run_edgewards(sc)
    assert state.services_on(1) == []
    assert state.services_on(2) == [0, 1, 2]


def test_two_paths_merge_at_father():
    topo = two_gateway_topology(150, 1000)
    app = helpers.linear_app(0, 0, 2)
    clients = (Client(0, 2, 0, Fraction(1, 10)), Client(1, 3, 0, Fraction(1, 10)))
    state = run_edgewards(Scenario(topo, {0: app}, clients))
    assert state.services_on(2) == [0]
    assert state.services_on(1) == [1]
    # the right gateway had room for service 1 but reuses the father's instance
    assert state.services_on(3) == [0]
    assert state.devices_of(1) == [1]


def test_cloud_absorbs_everything_else():
    topo = helpers.chain_topology([50, 50])
    sc = Scenario(topo, {0: helpers.linear_app(0, 0, 3)}, (Client(0, 1, 0, Fraction(1, 10)),))
    state = run_edgewards(sc)
    assert state.services_on(0) == [0, 1, 2]


@pytest.mark.parametrize("seed", range(60))
def test_invariants(seed):
    sc = helpers.random_scenario(seed, exact=True)
    check_invariants(sc, run_edgewards(sc))


@pytest.mark.parametrize("seed", range(20))
def test_deterministic(seed):
    sc = helpers.random_scenario(seed)
    assert run_edgewards(sc) == run_edgewards(sc)


@pytest.mark.parametrize("levels,children", [(1, 1), (2, 2), (3, 2), (2, 4)])
def test_matches_pop_when_gateways_suffice(levels, children):
    topo = build_tree_topology(levels, children)
    app = sock_shop()
    clients = tuple(Client(i, g, 0, Fraction(1, 10)) for i, g in enumerate(topo.gateways))
    sc = Scenario(topo, {0: app}, clients)
    assert oracles.flatten(run_pop(sc)) == oracles.flatten(run_edgewards(sc))
    assert all(d in topo.gateways for d in run_pop(sc).used_devices())
