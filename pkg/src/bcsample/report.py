"""Run reports: error statistics, key=value serialization and TSV tables."""
from __future__ import annotations

import statistics
from typing import Sequence

import numpy as np

from . import bounds
from .graph import Graph
from .sampler import BcResult, SamplerConfig

# key order of the report; optional keys are skipped when absent
REPORT_KEYS = (
    "graph.nodes",
    "graph.edges",
    "graph.directed",
    "graph.weighted",
    "mode",
    "epsilon",
    "delta",
    "schedule",
    "seed",
    "runs",
    "sample_size",
    "sample_size.mean",
    "iterations",
    "iterations.median",
    "final_delta",
    "omega",
    "schedule.sizes",
    "not_converged",
    "runtime.seconds",
    "runtime.sampling_pct",
    "runtime.stop_condition_pct",
    "runtime.other_pct",
    "union_bound_size",
    "union_bound_ratio",
    "error.max",
    "error.avg",
    "error.stddev",
    "error.runs_within_eps",
)


def error_stats(estimates: np.ndarray, exact: np.ndarray) -> dict[str, float]:
    """Max, mean and standard deviation of the per-node absolute error."""
    err = np.abs(np.asarray(estimates) - np.asarray(exact))
    return {"max": float(err.max()), "avg": float(err.mean()), "stddev": float(err.std())}


def schedule_text(schedule) -> str:
    if schedule == "adaptive":
        return "adaptive"
    return f"geometric:{schedule[1]:g}"


def build_report(
    g: Graph,
    cfg: SamplerConfig,
    results: Sequence[BcResult],
    seconds: Sequence[float],
    exact: np.ndarray | None = None,
) -> dict[str, object]:
    first = results[0]
    sizes = [r.sample_size for r in results]
    iters = [r.iterations for r in results]
    ub = bounds.union_bound_sample_size(g.node_count, cfg.epsilon, cfg.delta)
    pct = {k: float(np.mean([r.runtime_breakdown[k] for r in results])) for k in ("sampling", "stop_condition", "other")}
    rep: dict[str, object] = {
        "graph.nodes": g.node_count,
        "graph.edges": g.edge_count,
        "graph.directed": g.directed,
        "graph.weighted": g.weighted,
        "mode": cfg.mode,
        "epsilon": cfg.epsilon,
        "delta": cfg.delta,
        "schedule": schedule_text(cfg.schedule),
        "seed": cfg.seed,
        "runs": len(results),
        "sample_size": max(sizes),
        "sample_size.mean": float(np.mean(sizes)),
        "iterations": max(iters),
        "iterations.median": float(statistics.median(iters)),
        "final_delta": first.final_delta,
        "omega": first.omega_trace[-1],
        "schedule.sizes": ",".join(str(s) for s in first.size_trace),
        "not_converged": sum(r.not_converged for r in results),
        "runtime.seconds": float(sum(seconds)),
        "runtime.sampling_pct": pct["sampling"],
        "runtime.stop_condition_pct": pct["stop_condition"],
        "runtime.other_pct": pct["other"],
        "union_bound_size": ub,
        "union_bound_ratio": ub / max(sizes),
    }
    if exact is not None:
        stats = [error_stats(r.estimates, exact) for r in results]
        rep["error.max"] = max(s["max"] for s in stats)
        rep["error.avg"] = float(np.mean([s["avg"] for s in stats]))
        rep["error.stddev"] = float(np.mean([s["stddev"] for s in stats]))
        rep["error.runs_within_eps"] = sum(s["max"] <= cfg.epsilon for s in stats)
    return rep


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def format_report(rep: dict[str, object]) -> str:
    lines = [f"{k}={_fmt(rep[k])}" for k in REPORT_KEYS if k in rep]
    lines += [f"{k}={_fmt(v)}" for k, v in rep.items() if k not in REPORT_KEYS]
    return "\n".join(lines) + "\n"


def parse_report(text: str) -> dict[str, str]:
    out = {}
    for line in text.splitlines():
        if "=" in line and "\t" not in line:
            k, _, v = line.partition("=")
            out[k] = v
    return out


def format_table(g: Graph, values, nodes: Sequence[int] | None = None) -> str:
    """``node<TAB>bc`` rows with external labels and 12 significant digits."""
    if nodes is None:
        nodes = range(g.node_count)
    rows = ["node\tbc"]
    rows += [f"{g.labels[w]}\t{float(values[w]):.12g}" for w in nodes]
    return "\n".join(rows) + "\n"
