"""Scenario files: JSON documents validated against a strict schema.

Layout::

    {
      "name": "optional label",
      "topology": {"tree": {"levels": 2, "children": 2}}
                  | {"devices": [...], "links": [...], "gateways": [...]},
      "apps": [{"id": 0, "entry": "edge", "services": ["edge", ...],
                "edges": [{"from": "edge", "to": "frontend", "cpu": 1000,
                           "bytes": 10, "selectivity": 1}],
                "loops": [["edge", "frontend"]]}],
      "clients": [{"id": 0, "gateway": 3, "app": 0, "rate": 0.1}],
      "simulation_time_ms": 10000
    }

Services are listed by name (ids assigned in document order across apps) or
as ``{"id": ..., "name": ...}`` objects. Unknown keys are rejected.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Union

import jsonschema

from .model import (
    AppModel, Client, Device, Link, LinkConfig, Scenario, ScenarioError, ServiceEdge, Topology,
    build_tree_topology,
)

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_NONNEG = {"type": "number", "minimum": 0}
_INT = {"type": "integer", "minimum": 0}


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False}


SCHEMA: dict[str, Any] = _obj({
    "name": {"type": "string"},
    "params": {"type": "object", "additionalProperties": {"type": "integer"}},
    "simulation_time_ms": _POS,
    "topology": {"oneOf": [
        _obj({
            "tree": _obj({
                "levels": {"type": "integer", "minimum": 1},
                "children": {"type": "integer", "minimum": 1},
                "fog_cpu": _POS, "fog_ram": _NONNEG, "fog_latency": _NONNEG,
                "cloud_cpu": _POS, "cloud_ram": _NONNEG, "cloud_latency": _NONNEG,
                "ingress_latency": _NONNEG,
            }, ["levels", "children"]),
        }, ["tree"]),
        _obj({
            "devices": {"type": "array", "minItems": 1, "items": _obj({
                "id": _INT, "cpu": _POS, "ram": _NONNEG, "cloud": {"type": "boolean"},
                "level": _INT,
            }, ["id", "cpu"])},
            "links": {"type": "array", "items": _obj({
                "a": _INT, "b": _INT, "latency": _NONNEG,
            }, ["a", "b", "latency"])},
            "gateways": {"type": "array", "items": _INT},
            "ingress_latency": _NONNEG,
        }, ["devices", "links", "gateways"]),
    ]},
    "apps": {"type": "array", "items": _obj({
        "id": _INT,
        "name": {"type": "string"},
        "entry": {"type": "string"},
        "entry_cpu": _POS,
        "entry_bytes": _NONNEG,
        "services": {"type": "array", "minItems": 1, "items": {"oneOf": [
            {"type": "string"},
            _obj({"id": _INT, "name": {"type": "string"}}, ["id", "name"]),
        ]}},
        "edges": {"type": "array", "items": _obj({
            "from": {"type": "string"}, "to": {"type": "string"},
            "cpu": _POS, "bytes": _NONNEG, "selectivity": _NONNEG,
        }, ["from", "to"])},
        "loops": {"type": "array", "items": {"type": "array", "items": {"type": "string"}}},
    }, ["id", "entry", "services", "edges"])},
    "clients": {"type": "array", "items": _obj({
        "id": _INT, "gateway": _INT, "app": _INT, "rate": _NONNEG,
    }, ["id", "gateway", "app", "rate"])},
}, ["topology", "apps", "clients"])


class ScenarioFileError(ScenarioError):
    """Unreadable, malformed or schema-violating scenario document."""


def _topology_from(doc) -> Topology:
    if "tree" in doc:
        tree = dict(doc["tree"])
        levels, children = tree.pop("levels"), tree.pop("children")
        return build_tree_topology(levels, children, LinkConfig(**tree))
    devices = {}
    for d in doc["devices"]:
        devices[d["id"]] = Device(d["id"], d["cpu"], d.get("ram", 0.0), 0.0,
                                  d.get("cloud", False), d.get("level", 0))
    if len(devices) != len(doc["devices"]):
        raise ScenarioFileError("duplicate device ids")
    clouds = [d for d in devices.values() if d.is_cloud]
    if len(clouds) != 1:
        raise ScenarioFileError(f"exactly one cloud device expected, got {len(clouds)}")
    links = tuple(Link(l["a"], l["b"], l["latency"]) for l in doc["links"])
    kwargs = {"ingress_latency": doc["ingress_latency"]} if "ingress_latency" in doc else {}
    return Topology(devices, links, clouds[0].id, tuple(doc["gateways"]), **kwargs)


def _apps_from(docs) -> dict[int, AppModel]:
    apps = {}
    next_id = 0
    for doc in docs:
        names: dict[str, int] = {}
        for item in doc["services"]:
            if isinstance(item, str):
                sid, name = next_id, item
            else:
                sid, name = item["id"], item["name"]
            if name in names:
                raise ScenarioFileError(f"app {doc['id']}: duplicate service name {name!r}")
            names[name] = sid
            next_id = max(next_id, sid) + 1

        def ref(name):
            try:
                return names[name]
            except KeyError:
                raise ScenarioFileError(f"app {doc['id']}: unknown service {name!r}") from None

        edges = tuple(ServiceEdge(ref(e["from"]), ref(e["to"]), e.get("cpu", 1000),
                                  e.get("bytes", 10), e.get("selectivity", 1))
                      for e in doc["edges"])
        loops = tuple(tuple(ref(n) for n in lp) for lp in doc.get("loops", ()))
        if doc["id"] in apps:
            raise ScenarioFileError(f"duplicate app id {doc['id']}")
        apps[doc["id"]] = AppModel(
            doc["id"], tuple(names.values()), edges, ref(doc["entry"]),
            doc.get("entry_cpu", 1000), doc.get("entry_bytes", 10), doc.get("name", ""),
            {sid: n for n, sid in names.items()}, loops)
    return apps


def scenario_from_dict(doc: dict) -> Scenario:
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ScenarioFileError(f"schema violation at {where}: {exc.message}") from None
    topology = _topology_from(doc["topology"])
    apps = _apps_from(doc["apps"])
    clients = tuple(Client(c["id"], c["gateway"], c["app"], c["rate"]) for c in doc["clients"])
    return Scenario(topology, apps, clients, doc.get("simulation_time_ms", 10000.0),
                    doc.get("name", ""), doc.get("params", {}))


def load_scenario(source: Union[str, Path]) -> Scenario:
    path = Path(source)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioFileError(f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioFileError(
            f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return scenario_from_dict(doc)


def app_to_dict(app: AppModel) -> dict:
    return {
        "id": app.id,
        "name": app.name,
        "entry": app.label(app.entry),
        "entry_cpu": app.entry_cpu,
        "entry_bytes": app.entry_message_size,
        "services": [{"id": s, "name": app.label(s)} for s in app.services],
        "edges": [{"from": app.label(e.source), "to": app.label(e.target), "cpu": e.cpu_demand,
                   "bytes": e.message_size, "selectivity": e.selectivity} for e in app.edges],
        "loops": [[app.label(s) for s in lp] for lp in app.loops],
    }


def scenario_to_dict(scenario: Scenario) -> dict:
    topo = scenario.topology
    return {
        "name": scenario.name,
        "params": dict(scenario.params),
        "simulation_time_ms": scenario.simulation_time,
        "topology": {
            "devices": [{"id": d.id, "cpu": d.cpu_capacity, "ram": d.ram_capacity,
                         "cloud": d.is_cloud, "level": d.level} for d in topo.devices.values()],
            "links": [{"a": l.a, "b": l.b, "latency": l.latency} for l in topo.links],
            "gateways": list(topo.gateways),
            "ingress_latency": topo.ingress_latency,
        },
        "apps": [app_to_dict(a) for a in scenario.apps.values()],
        "clients": [{"id": c.id, "gateway": c.gateway, "app": c.app, "rate": c.entry_rate}
                    for c in scenario.clients],
    }
