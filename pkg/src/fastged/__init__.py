"""K-Best graph edit distance with an exact branch-and-bound oracle."""

from fastged.engine import EngineConfig, GedResult, ged_kbest
from fastged.graph import (CostModel, EditOp, EditPath, LabeledGraph, apply_edit_path,
                           graphs_equal_under_mapping, path_cost)
from fastged.io import GenSpec, generate_random, read_graph, write_graph
from fastged.oracle import OracleConfig, exact_ged, exhaustive_ged

__all__ = [
    "CostModel", "EditOp", "EditPath", "EngineConfig", "GedResult", "GenSpec", "LabeledGraph",
    "OracleConfig", "apply_edit_path", "exact_ged", "exhaustive_ged", "ged_kbest",
    "generate_random", "graphs_equal_under_mapping", "path_cost", "read_graph", "write_graph",
]
