"""Fog service placement simulator."""

from .model import (
    AppModel, Client, Device, Link, LinkConfig, ResourceUsage, Scenario, ScenarioError, ServiceEdge,
    Topology, TopologyError, build_tree_topology, device_request_rate, father, resource_usage,
    shortest_path_to_cloud, transitive_closure,
)
from .placement import Migration, PlacementState
from .policy_pop import migration_candidates, on_client_connect, place, run_pop, subset_rate
from .policy_edgewards import run_edgewards
from .engine import CoverageError, FlowTrace, LoopSpec, loop_latency, network_usage, resolve_instance, simulate
from .metrics import MetricsReport, arithmetic_hop_count, assemble_report, migration_count, weighted_hop_count
from .scenarios import SweepSpec, generate_grid, make_cell, replicate_apps, sock_shop

__version__ = "0.1.0"
