"""Graph storage, edge-list ingestion and truncated s-t shortest paths.

Graphs are immutable once built. Node ids are dense integers
``0..node_count-1``; the original integer labels of an edge list are kept
in ``Graph.labels`` (index -> label) and ``Graph.id_map`` (label -> index).
"""
from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

log = logging.getLogger(__name__)

U64_MAX = (1 << 64) - 1
DIST_TOL = 1e-12


class EdgeListError(ValueError):
    """Malformed or invalid edge-list input."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class PathCountOverflow(OverflowError):
    """A shortest-path count does not fit in an unsigned 64-bit integer."""


class ContractError(RuntimeError):
    """An operation was called outside of its precondition."""


@dataclass(frozen=True)
class IngestReport:
    nodes: int
    edges: int
    self_loops: int
    duplicates: int


class Graph:
    """Immutable adjacency-list graph with optional non-negative weights.

    ``adj[x]`` lists the out-neighbours of ``x`` (all neighbours when the
    graph is undirected). ``weights`` is ``None`` for unit-weight graphs,
    otherwise ``weights[x][i]`` is the weight of the edge to ``adj[x][i]``.
    """

    __slots__ = ("node_count", "directed", "adj", "weights", "labels", "id_map", "edge_count", "report")

    def __init__(
        self,
        node_count: int,
        edges: Iterable[tuple[int, int] | tuple[int, int, float]],
        directed: bool = False,
        labels: Sequence[int] | None = None,
    ):
        if node_count < 1:
            raise ValueError("node_count must be positive")
        self.node_count = node_count
        self.directed = directed
        adj: list[list[int]] = [[] for _ in range(node_count)]
        wts: list[list[float]] = [[] for _ in range(node_count)]
        seen: set[tuple[int, int]] = set()
        weighted = False
        loops = dups = 0
        for e in edges:
            a, b = int(e[0]), int(e[1])
            if not (0 <= a < node_count and 0 <= b < node_count):
                raise ValueError(f"edge ({a}, {b}) out of range")
            if len(e) > 2:
                w = float(e[2])  # type: ignore[misc]
                weighted = True
                if w < 0:
                    raise ValueError(f"negative weight on edge ({a}, {b})")
            else:
                w = 1.0
            if a == b:
                loops += 1
                continue
            key = (a, b) if directed or a < b else (b, a)
            if key in seen:
                dups += 1
                continue
            seen.add(key)
            adj[a].append(b)
            wts[a].append(w)
            if not directed:
                adj[b].append(a)
                wts[b].append(w)
        self.adj = tuple(tuple(x) for x in adj)
        self.weights = tuple(tuple(x) for x in wts) if weighted else None
        self.edge_count = len(seen)
        self.labels = tuple(labels) if labels is not None else tuple(range(node_count))
        if len(self.labels) != node_count:
            raise ValueError("labels must have one entry per node")
        self.id_map = {lab: i for i, lab in enumerate(self.labels)}
        self.report = IngestReport(node_count, self.edge_count, loops, dups)

    @property
    def weighted(self) -> bool:
        return self.weights is not None

    def edges(self) -> list[tuple[int, int, float]]:
        """Edges as ``(a, b, weight)``; undirected edges are listed once with a < b."""
        out = []
        for a, nbrs in enumerate(self.adj):
            ws = self.weights[a] if self.weights is not None else None
            for i, b in enumerate(nbrs):
                if self.directed or a < b:
                    out.append((a, b, ws[i] if ws is not None else 1.0))
        return out

    def __repr__(self) -> str:
        kind = "directed" if self.directed else "undirected"
        return f"Graph({self.node_count} nodes, {self.edge_count} edges, {kind})"


def load_edge_list(stream: TextIO | Iterable[str], directed: bool = False) -> Graph:
    """Parse a SNAP-style edge list (``u v [w]`` per line, ``#`` comments).

    Integer labels are remapped to dense ids in ascending label order.
    Self-loops are dropped and repeated edges collapsed (first weight wins);
    both are counted in ``graph.report``.
    """
    raw: list[tuple] = []
    labels: set[int] = set()
    for lineno, line in enumerate(stream, start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        parts = s.split()
        if len(parts) not in (2, 3):
            raise EdgeListError(f"expected 'u v [w]', got {s!r}", lineno)
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise EdgeListError(f"node labels must be integers: {s!r}", lineno) from None
        labels.add(a)
        labels.add(b)
        if len(parts) == 3:
            try:
                w = float(parts[2])
            except ValueError:
                raise EdgeListError(f"bad weight {parts[2]!r}", lineno) from None
            if not w >= 0:
                raise EdgeListError(f"negative weight {w}", lineno)
            raw.append((a, b, w))
        else:
            raw.append((a, b))
    if not labels:
        raise EdgeListError("edge list contains no edges")
    order = sorted(labels)
    idx = {lab: i for i, lab in enumerate(order)}
    edges = [(idx[e[0]], idx[e[1]], *e[2:]) for e in raw]
    g = Graph(len(order), edges, directed=directed, labels=order)
    r = g.report
    if r.self_loops or r.duplicates:
        log.warning("dropped %d self-loops, collapsed %d duplicate edges", r.self_loops, r.duplicates)
    return g


@dataclass
class StSpDag:
    """Truncated shortest-path DAG from ``source`` towards ``target``."""

    source: int
    target: int
    reached: bool
    dist: dict[int, float] = field(default_factory=dict)
    sigma: dict[int, int] = field(default_factory=dict)
    preds: dict[int, list[int]] = field(default_factory=dict)

    @property
    def sigma_st(self) -> int:
        return self.sigma.get(self.target, 0)


def st_shortest_paths(g: Graph, u: int, v: int) -> StSpDag:
    """Shortest paths from ``u`` with path counts, stopped once ``v`` is settled.

    BFS is used on unit-weight graphs and Dijkstra otherwise. Only nodes at
    distance at most d(u, v) are visited.
    """
    if u == v:
        raise ContractError("source and target must differ")
    n = g.node_count
    if not (0 <= u < n and 0 <= v < n):
        raise ContractError(f"node id out of range: ({u}, {v})")
    if g.weights is None:
        dag = _bfs(g.adj, u, v)
    else:
        dag = _dijkstra(g.adj, g.weights, u, v)
    if dag.reached and dag.sigma[v] > U64_MAX:
        raise PathCountOverflow(f"more than 2^64-1 shortest paths from {u} to {v}")
    return dag


def _bfs(adj: Sequence[Sequence[int]], u: int, v: int) -> StSpDag:
    dist = {u: 0}
    sigma = {u: 1}
    preds: dict[int, list[int]] = {u: []}
    frontier = [u]
    d = 0
    # level-synchronous: when v is discovered its whole predecessor level is done
    while frontier and v not in dist:
        nd = d + 1
        nxt = []
        for x in frontier:
            sx = sigma[x]
            for y in adj[x]:
                dy = dist.get(y)
                if dy is None:
                    dist[y] = nd
                    sigma[y] = sx
                    preds[y] = [x]
                    nxt.append(y)
                elif dy == nd:
                    sigma[y] += sx
                    preds[y].append(x)
        frontier = nxt
        d = nd
    return StSpDag(u, v, v in dist, dist, sigma, preds)


def _dijkstra(adj, weights, u: int, v: int) -> StSpDag:
    dist: dict[int, float] = {u: 0.0}
    sigma = {u: 1}
    preds: dict[int, list[int]] = {u: []}
    settled: set[int] = set()
    heap = [(0.0, u)]
    limit = None
    while heap:
        dx, x = heapq.heappop(heap)
        if x in settled or dx > dist[x] + DIST_TOL:
            continue
        if limit is not None and dx > limit + DIST_TOL:
            break
        settled.add(x)
        if x == v:
            limit = dx
        sx = sigma[x]
        for y, w in zip(adj[x], weights[x]):
            if y in settled:
                continue
            nd = dx + w
            dy = dist.get(y)
            if dy is None or nd < dy - DIST_TOL:
                dist[y] = nd
                sigma[y] = sx
                preds[y] = [x]
                heapq.heappush(heap, (nd, y))
            elif abs(nd - dy) <= DIST_TOL:
                sigma[y] += sx
                preds[y].append(x)
    reached = v in settled
    # drop tentatively-labelled nodes beyond d(u, v)
    if reached:
        keep = {x for x in dist if dist[x] <= dist[v] + DIST_TOL}
    else:
        keep = settled
    dist = {x: d for x, d in dist.items() if x in keep}
    sigma = {x: s for x, s in sigma.items() if x in keep}
    preds = {x: p for x, p in preds.items() if x in keep}
    return StSpDag(u, v, reached, dist, sigma, preds)


def backtrack_internal_counts(dag: StSpDag) -> list[tuple[int, int]]:
    """Nodes internal to some source->target shortest path with their path counts.

    Returns ``(w, sigma_uv(w))`` pairs in decreasing order of distance from
    the source (ties by node id), where sigma_uv(w) = sigma_uw * sigma_wv.
    """
    if not dag.reached:
        raise ContractError("target was not reached; no shortest paths to backtrack")
    u, t = dag.source, dag.target
    preds, sigma, dist = dag.preds, dag.sigma, dag.dist
    on_dag = {t}
    stack = [t]
    while stack:
        x = stack.pop()
        for z in preds[x]:
            if z not in on_dag:
                on_dag.add(z)
                stack.append(z)
    order = sorted(on_dag, key=lambda x: (-dist[x], x))
    to_target = {t: 1}
    out = []
    for w in order:
        sw = to_target[w]
        if w != t and w != u:
            out.append((w, sigma[w] * sw))
        for z in preds[w]:
            to_target[z] = to_target.get(z, 0) + sw
    return out
