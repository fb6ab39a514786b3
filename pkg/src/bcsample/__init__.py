"""Exact and sampled betweenness centrality with Rademacher-average stopping rules."""
from .bounds import VectorSet, omega_star
from .exact import brandes_exact
from .graph import Graph, load_edge_list, st_shortest_paths, backtrack_internal_counts
from .sampler import (
    BcResult,
    SamplerConfig,
    TopKInfeasible,
    TopKResult,
    run,
    run_abra_s,
    run_linear_scaling,
    run_topk,
    run_unique_sp,
)

__version__ = "0.1.0"

__all__ = [
    "BcResult",
    "Graph",
    "SamplerConfig",
    "TopKInfeasible",
    "TopKResult",
    "VectorSet",
    "backtrack_internal_counts",
    "brandes_exact",
    "load_edge_list",
    "omega_star",
    "run",
    "run_abra_s",
    "run_linear_scaling",
    "run_topk",
    "run_unique_sp",
    "st_shortest_paths",
]
