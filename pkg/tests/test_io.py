import json

import pytest

from fogplace.io import ScenarioFileError, load_scenario, scenario_from_dict, scenario_to_dict
from fogplace.policy_pop import run_pop
from fogplace.scenarios import make_cell

import helpers
import oracles


def minimal():
    return {
        "topology": {"tree": {"levels": 2, "children": 2}},
        "apps": [{"id": 0, "entry": "a", "services": ["a", "b"],
                  "edges": [{"from": "a", "to": "b"}], "loops": [["a", "b"]]}],
        "clients": [{"id": 0, "gateway": 3, "app": 0, "rate": 0.1}],
    }


def test_minimal_document():
    sc = scenario_from_dict(minimal())
    app = sc.apps[0]
    assert app.services == (0, 1) and app.entry == 0
    assert app.edges[0].cpu_demand == 1000 and app.edges[0].message_size == 10
    assert sc.simulation_time == 10000
    assert len(sc.topology.devices) == 7


def test_unknown_key_rejected():
    doc = minimal()
    doc["clients"][0]["speed"] = 3
    with pytest.raises(ScenarioFileError, match="clients/0"):
        scenario_from_dict(doc)


def test_unknown_service_reference():
    doc = minimal()
    doc["apps"][0]["edges"][0]["to"] = "zzz"
    with pytest.raises(ScenarioFileError, match="zzz"):
        scenario_from_dict(doc)


def test_malformed_json_reports_line(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "topology": \n}\n')
    with pytest.raises(ScenarioFileError, match="line 3"):
        load_scenario(p)


def test_missing_file(tmp_path):
    with pytest.raises(ScenarioFileError):
        load_scenario(tmp_path / "nope.json")


def test_semantic_errors_surface():
    doc = minimal()
    doc["clients"][0]["gateway"] = 1  # a mid-level device
    with pytest.raises(ValueError):
        scenario_from_dict(doc)


@pytest.mark.parametrize("seed", range(10))
def test_round_trip(seed, tmp_path):
    sc = helpers.random_scenario(seed)
    p = tmp_path / "sc.json"
    p.write_text(json.dumps(scenario_to_dict(sc)))
    back = load_scenario(p)
    assert back.topology.devices == sc.topology.devices
    assert back.clients == sc.clients
    assert {a: (x.services, x.edges, x.entry) for a, x in back.apps.items()} == {
        a: (x.services, x.edges, x.entry) for a, x in sc.apps.items()}
    assert oracles.flatten(run_pop(back)) == oracles.flatten(run_pop(sc))


def test_grid_cell_round_trip():
    sc = make_cell(2, 2, 2, 2)
    back = scenario_from_dict(json.loads(json.dumps(scenario_to_dict(sc))))
    assert back.name == sc.name and back.params == sc.params
    assert oracles.flatten(run_pop(back)) == oracles.flatten(run_pop(sc))
