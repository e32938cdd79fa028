"""Multi-root aggregation trees, passive link awareness and auxiliary-path
transmission for parameter synchronization over wide-area overlays."""

from .config import ConfigError, Hyperparams
from .metric import AggTree, path_delay, quality_score, subtree_delays, tree_delay
from .overlay import OverlayGraph, build_graph, delay_view, graph_from_weights
from .planner import SyncPlan, build_baseline, build_plan, find_fastest_paths
from .auxroute import AuxRouteTable, search_aux_paths
from .scenario import Scenario, load_scenario, parse_scenario
from .simnet import IterationMetrics, Simulation, measure_normalized_throughput, run

__all__ = [
    "AggTree", "AuxRouteTable", "ConfigError", "Hyperparams", "IterationMetrics",
    "OverlayGraph", "Scenario", "Simulation", "SyncPlan", "build_baseline", "build_graph",
    "build_plan", "delay_view", "find_fastest_paths", "graph_from_weights", "load_scenario",
    "measure_normalized_throughput", "parse_scenario", "path_delay", "quality_score",
    "run", "search_aux_paths", "subtree_delays", "tree_delay",
]
