"""Experiment grid: the Sock Shop application and the four sweep axes."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from importlib import resources
from typing import Optional, Sequence

from .model import AppModel, Client, LinkConfig, Scenario, ScenarioError, ServiceEdge, build_tree_topology

#: entry request rate of each app replica, in replica order (req/ms)
REPLICA_RATES = (1 / 10, 1 / 20, 1 / 25, 1 / 30, 1 / 35)
AXES = ("users", "apps", "levels", "children")
DEFAULT_FIXED = {"users": 2, "apps": 2, "levels": 2, "children": 2}
DEFAULT_VALUES = (1, 2, 3, 4, 5)
DEFAULT_SIMULATION_TIME = 10000.0
LOOP = ("edge", "frontend", "orders", "accounts")


class ConfigError(ScenarioError):
    pass


def sock_shop(accounts_via: str = "parallel") -> AppModel:
    """The bundled Sock Shop model; ``accounts`` runs three times per entry request.

    ``accounts_via`` picks how that multiplier arises: ``"parallel"`` (the
    bundled file) has three unit orders->accounts edges, ``"paths"`` reaches
    accounts once each from frontend, orders and payment, and
    ``"selectivity"`` uses a single orders->accounts edge of selectivity 3.
    """
    from .io import scenario_from_dict

    text = resources.files("fogplace").joinpath("data/sock_shop.json").read_text()
    app = scenario_from_dict(json.loads(text)).apps[0]
    if accounts_via == "parallel":
        return app
    acc, orders = app.service_id("accounts"), app.service_id("orders")
    edges = [e for e in app.edges if e.target != acc]
    if accounts_via == "paths":
        edges += [ServiceEdge(app.service_id(src), acc, 1000, 10, 1)
                  for src in ("frontend", "orders", "payment")]
    elif accounts_via == "selectivity":
        edges.append(ServiceEdge(orders, acc, 1000, 10, 3))
    else:
        raise ValueError(f"unknown accounts_via {accounts_via!r}")
    return replace(app, edges=tuple(edges))


def replicate_apps(base: AppModel, n: int, rates: Sequence[float] = REPLICA_RATES
                   ) -> tuple[list[AppModel], dict[int, float]]:
    """``n`` copies of ``base`` with disjoint service ids; replica k runs at ``rates[k]``."""
    if n > len(rates):
        raise ConfigError(f"{n} replicas requested but only {len(rates)} rates available")
    if n < 0:
        raise ConfigError("replica count must be non-negative")
    span = max(base.services) + 1
    apps, assigned = [], {}
    for k in range(n):
        off = k * span
        apps.append(AppModel(
            k,
            tuple(s + off for s in base.services),
            tuple(replace(e, source=e.source + off, target=e.target + off) for e in base.edges),
            base.entry + off,
            base.entry_cpu,
            base.entry_message_size,
            f"{base.name or 'app'}-{k}",
            {s + off: n_ for s, n_ in base.service_names.items()},
            tuple(tuple(s + off for s in lp) for lp in base.loops),
        ))
        assigned[k] = rates[k]
    return apps, assigned


def cell_name(users: int, apps: int, levels: int, children: int) -> str:
    return f"users-{users}_apps-{apps}_levels-{levels}_children-{children}"


_CELL_RE = re.compile(r"^users-(\d+)_apps-(\d+)_levels-(\d+)_children-(\d+)$")


def parse_cell_name(name: str) -> Optional[dict[str, int]]:
    m = _CELL_RE.match(name)
    if not m:
        return None
    return dict(zip(AXES, map(int, m.groups())))


def make_cell(users: int = 2, apps: int = 2, levels: int = 2, children: int = 2,
              base: Optional[AppModel] = None, link_cfg: Optional[LinkConfig] = None,
              simulation_time: float = DEFAULT_SIMULATION_TIME) -> Scenario:
    """One grid cell: every user at every gateway requests every app replica."""
    if users < 0:
        raise ConfigError("users per gateway must be non-negative")
    topology = build_tree_topology(levels, children, link_cfg)
    replicas, rates = replicate_apps(base or sock_shop(), apps)
    clients = []
    for g in topology.gateways:
        for _ in range(users):
            for app in replicas:
                clients.append(Client(len(clients), g, app.id, rates[app.id]))
    params = {"users": users, "apps": apps, "levels": levels, "children": children}
    return Scenario(topology, {a.id: a for a in replicas}, tuple(clients), simulation_time,
                    cell_name(users, apps, levels, children), params)


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple[int, ...] = DEFAULT_VALUES
    fixed: dict = field(default_factory=lambda: dict(DEFAULT_FIXED))

    def __post_init__(self):
        if self.axis not in AXES:
            raise ConfigError(f"unknown axis {self.axis!r}; expected one of {AXES}")
        unknown = set(self.fixed) - set(AXES)
        if unknown:
            raise ConfigError(f"unknown fixed parameters {sorted(unknown)}")
        if not self.values:
            raise ConfigError("a sweep needs at least one value")

    def cells(self) -> list[dict[str, int]]:
        out = []
        for v in self.values:
            params = {**DEFAULT_FIXED, **self.fixed}
            params[self.axis] = v
            out.append(params)
        return out


def generate_grid(spec: SweepSpec) -> list[Scenario]:
    return [make_cell(**params) for params in spec.cells()]


def full_battery(fixed: Optional[dict] = None) -> list[Scenario]:
    """All four axes swept over 1..5 around the fixed point."""
    out = []
    for axis in AXES:
        out.extend(generate_grid(SweepSpec(axis, fixed=dict(fixed or DEFAULT_FIXED))))
    return out


def exact_rates() -> tuple[Fraction, ...]:
    """The replica rates as exact fractions, for rational-arithmetic checks."""
    return tuple(Fraction(1, d) for d in (10, 20, 25, 30, 35))
