"""Command-line entry point.

Exit codes: 0 ok, 2 input error, 3 not converged, 4 top-k phase two infeasible.
"""
from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import shatter
from .exact import brandes_exact
from .graph import EdgeListError, Graph, load_edge_list
from .report import build_report, format_report, format_table
from .sampler import SamplerConfig, TopKInfeasible, run, run_topk

EXIT_INPUT = 2
EXIT_NOT_CONVERGED = 3
EXIT_TOPK = 4


class InputError(Exception):
    pass


def _load(path: str, directed: bool) -> Graph:
    try:
        with open(path) as fh:
            return load_edge_list(fh, directed=directed)
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror or e}") from None
    except EdgeListError as e:
        raise InputError(f"{path}: {e}") from None


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("ABRA_THREADS", "1")))
    except ValueError:
        return 1


def _timed_run(args):
    g, cfg = args
    t0 = time.perf_counter()
    res = run(g, cfg)
    return res, time.perf_counter() - t0


def cmd_exact(ns) -> int:
    g = _load(ns.graph, ns.directed)
    if g.node_count < 2:
        raise InputError("graph needs at least two nodes")
    _emit(format_table(g, brandes_exact(g)), ns.out)
    return 0


def cmd_approx(ns) -> int:
    g = _load(ns.graph, ns.directed)
    if ns.runs < 1:
        raise InputError("--runs must be at least 1")
    try:
        cfgs = [
            SamplerConfig(ns.eps, ns.delta, mode=ns.mode, schedule=ns.schedule, seed=ns.seed + i, max_samples=ns.max_samples)
            for i in range(ns.runs)
        ]
    except ValueError as e:
        raise InputError(str(e)) from None
    jobs = [(g, c) for c in cfgs]
    workers = min(_threads(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            out = list(pool.map(_timed_run, jobs))
    else:
        out = [_timed_run(j) for j in jobs]
    results = [r for r, _ in out]
    exact = brandes_exact(g) if ns.exact_compare else None
    rep = build_report(g, cfgs[0], results, [t for _, t in out], exact)
    text = format_report(rep)
    if ns.out:
        _emit(format_table(g, results[0].estimates), ns.out)
        sys.stdout.write(text)
    else:
        sys.stdout.write(text + format_table(g, results[0].estimates))
    if rep["not_converged"]:
        print(f"warning: {rep['not_converged']} run(s) hit max_samples before converging", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return 0


def cmd_topk(ns) -> int:
    g = _load(ns.graph, ns.directed)
    try:
        cfg = SamplerConfig(ns.eps, ns.delta, mode="topk", k=ns.k, schedule=ns.schedule, seed=ns.seed, max_samples=ns.max_samples)
    except ValueError as e:
        raise InputError(str(e)) from None
    try:
        res = run_topk(g, cfg)
    except TopKInfeasible as e:
        print(f"error: {e}; lower --eps or --k", file=sys.stderr)
        return EXIT_TOPK
    head = (
        f"k={res.k}\n"
        f"threshold={res.threshold:.12g}\n"
        f"phase1_threshold={res.phase1_threshold:.12g}\n"
        f"phase1_sample_size={res.phase1_size}\n"
        f"phase2_sample_size={res.phase2_size}\n"
        f"entries={len(res.entries)}\n"
    )
    est = {w: b for w, b in res.entries}
    _emit(head + format_table(g, est, [w for w, _ in res.entries]), ns.out)
    if res.phase2 is not None and res.phase2.not_converged:
        return EXIT_NOT_CONVERGED
    return 0


def parse_points(lines, g: Graph) -> list[shatter.RangePoint]:
    pts = []
    for lineno, line in enumerate(lines, start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        parts = s.split()
        if len(parts) != 3:
            raise InputError(f"points line {lineno}: expected 'u v x', got {s!r}")
        try:
            u, v = g.id_map[int(parts[0])], g.id_map[int(parts[1])]
            x = Fraction(parts[2])
            pts.append(shatter.RangePoint((u, v), x))
        except KeyError as e:
            raise InputError(f"points line {lineno}: unknown node {e.args[0]}") from None
        except (ValueError, ZeroDivisionError) as e:
            raise InputError(f"points line {lineno}: {e}") from None
    return pts


def cmd_shatter(ns) -> int:
    g = _load(ns.graph, ns.directed)
    try:
        with open(ns.points) as fh:
            pts = parse_points(fh, g)
    except OSError as e:
        raise InputError(f"cannot read {ns.points}: {e.strerror or e}") from None
    try:
        wit = shatter.check_shattering(g, pts)
    except ValueError as e:
        raise InputError(str(e)) from None
    letters = "abcdefghijklmnopqrst"
    if wit is None:
        reason = shatter.shatter_obstruction(pts) or "some subset is not cut out by any range"
        _emit(f"not shattered: {reason}\n", ns.out)
        return 0
    rows = ["subset\tnode\tall_nodes"]
    order = sorted(wit.subset_to_node, key=lambda s: (len(s), sorted(s)))
    for sub in order:
        name = "".join(letters[i] for i in sorted(sub)) or "{}"
        alln = ",".join(str(g.labels[w]) for w in wit.realizers[sub])
        rows.append(f"{name}\t{g.labels[wit.subset_to_node[sub]]}\t{alln}")
    _emit("shattered\n" + "\n".join(rows) + "\n", ns.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bcsample", description="Exact and sampled betweenness centrality")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("graph", help="edge list: 'u v [w]' per line, '#' comments")
        sp.add_argument("--directed", action="store_true", help="treat edges as directed")
        sp.add_argument("--out", help="write the table here instead of stdout")

    sp = sub.add_parser("exact", help="exact betweenness of every node")
    common(sp)
    sp.set_defaults(func=cmd_exact)

    def sampling(sp):
        sp.add_argument("--eps", type=float, default=0.05)
        sp.add_argument("--delta", type=float, default=0.1)
        sp.add_argument("--schedule", default="adaptive", help="'adaptive' or 'geometric:<c>'")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--max-samples", type=int, default=None)

    sp = sub.add_parser("approx", help="sampled estimates with an (eps, delta) guarantee")
    common(sp)
    sampling(sp)
    sp.add_argument("--mode", choices=("absolute", "linear_scaling", "unique_sp"), default="absolute")
    sp.add_argument("--exact-compare", action="store_true", help="add error statistics against the exact values")
    sp.add_argument("--runs", type=int, default=1, help="repeat with seeds seed..seed+runs-1")
    sp.set_defaults(func=cmd_approx)

    sp = sub.add_parser("topk", help="superset of the k most central nodes, relative error")
    common(sp)
    sampling(sp)
    sp.add_argument("--k", type=int, required=True)
    sp.set_defaults(func=cmd_topk)

    sp = sub.add_parser("shatter", help="check whether a point set is shattered")
    common(sp)
    sp.add_argument("points", help="lines 'u v x' with x a fraction such as 1/2")
    sp.set_defaults(func=cmd_shatter)
    return p


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        return ns.func(ns)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
