"""Shattering checks for the ranges of the betweenness function family.

For a node w, the range R_w holds the points ((u, v), x) with x = 0, or
with w internal to a u->v shortest path and x <= sigma_uv(w) / sigma_uv.
All ratios are exact fractions.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources

from .graph import Graph, backtrack_internal_counts, load_edge_list, st_shortest_paths

MAX_POINTS = 20
MAX_VERIFY_NODES = 15

ZERO_X_REASON = "a point with x = 0 lies in every range, so no range can exclude it"
SAME_PAIR_REASON = "two points share a node pair; a range containing the larger x contains the smaller"


@dataclass(frozen=True)
class RangePoint:
    pair: tuple[int, int]
    x: Fraction

    def __post_init__(self):
        u, v = self.pair
        if u == v:
            raise ValueError("range points need two distinct nodes")
        x = Fraction(self.x)
        if not 0 <= x <= 1:
            raise ValueError(f"x must be in [0, 1], got {x}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "pair", (int(u), int(v)))


@dataclass
class ShatterWitness:
    """Maps each subset of the point indices to a node realizing it."""

    points: tuple[RangePoint, ...]
    subset_to_node: dict[frozenset[int], int]
    realizers: dict[frozenset[int], tuple[int, ...]]

    def node_for(self, labels: str) -> int:
        """Witness for a subset named by letters, e.g. ``"ac"`` for points 0 and 2."""
        return self.subset_to_node[frozenset("abcdefghijklmnopqrst".index(c) for c in labels)]


def pair_ratios(g: Graph, u: int, v: int) -> dict[int, Fraction]:
    """sigma_uv(w) / sigma_uv for every node w internal to a u->v shortest path."""
    return dict(_pair_info(g)(u, v)[1])


def path_count(g: Graph, u: int, v: int) -> int:
    """Number of shortest paths from u to v (0 if unreachable)."""
    return _pair_info(g)(u, v)[0]


@lru_cache(maxsize=8)
def _pair_info(g: Graph):
    @lru_cache(maxsize=None)
    def info(u: int, v: int) -> tuple[int, tuple[tuple[int, Fraction], ...]]:
        dag = st_shortest_paths(g, u, v)
        if not dag.reached:
            return 0, ()
        tot = dag.sigma_st
        return tot, tuple((w, Fraction(c, tot)) for w, c in backtrack_internal_counts(dag))

    return info


def range_contains(g: Graph, w: int, p: RangePoint) -> bool:
    if p.x == 0:
        return True
    r = pair_ratios(g, *p.pair).get(w)
    return r is not None and p.x <= r


def shatter_obstruction(points) -> str | None:
    """Reason a point set can never be shattered, from its shape alone."""
    pairs = set()
    for p in points:
        if p.x == 0:
            return ZERO_X_REASON
        if p.pair in pairs:
            return SAME_PAIR_REASON
        pairs.add(p.pair)
    return None


def _membership_masks(g: Graph, points) -> list[int]:
    """Bitmask of the points contained in R_w, for each node w."""
    masks = [0] * g.node_count
    for i, p in enumerate(points):
        bit = 1 << i
        if p.x == 0:
            for w in range(g.node_count):
                masks[w] |= bit
            continue
        for w, r in pair_ratios(g, *p.pair).items():
            if p.x <= r:
                masks[w] |= bit
    return masks


def check_shattering(g: Graph, points) -> ShatterWitness | None:
    """Witness node for every subset of ``points``, or None if not shattered.

    Witnesses are the smallest node id realizing each subset.
    """
    points = tuple(points)
    if len(points) > MAX_POINTS:
        raise ValueError(f"at most {MAX_POINTS} points can be enumerated, got {len(points)}")
    for p in points:
        for x in p.pair:
            if not 0 <= x < g.node_count:
                raise ValueError(f"node {x} out of range")
    if shatter_obstruction(points) is not None:
        return None
    found: dict[int, list[int]] = {}
    for w, m in enumerate(_membership_masks(g, points)):
        found.setdefault(m, []).append(w)
    if len(found) < 1 << len(points):
        return None
    subsets, realizers = {}, {}
    for m, nodes in found.items():
        key = frozenset(i for i in range(len(points)) if m >> i & 1)
        subsets[key] = nodes[0]
        realizers[key] = tuple(nodes)
    return ShatterWitness(points, subsets, realizers)


def _candidate_points(g: Graph) -> list[RangePoint]:
    pts = []
    for u, v in itertools.permutations(range(g.node_count), 2):
        ratios = pair_ratios(g, u, v)
        if not ratios:
            continue
        for x in sorted(set(ratios.values()) | {Fraction(1)}):
            pts.append(RangePoint((u, v), x))
    return pts


def verify_unique_sp_bound(g: Graph) -> bool:
    """Exhaustively confirm no 4-point set with >= 3 unique-path pairs is shattered.

    Shattered sets are grown one point at a time (subsets of a shattered set
    are shattered), so only shattered prefixes are extended.
    """
    if g.node_count > MAX_VERIFY_NODES:
        raise ValueError(f"exhaustive check limited to {MAX_VERIFY_NODES} nodes, graph has {g.node_count}")
    if g.directed:
        raise ValueError("the unique-path bound concerns undirected graphs")
    pts = _candidate_points(g)
    masks = [sum(1 << w for w, r in pair_ratios(g, *p.pair).items() if p.x <= r) for p in pts]
    unique = [path_count(g, *p.pair) == 1 for p in pts]
    n = g.node_count

    def shattered(idx):
        patterns = set()
        for w in range(n):
            patterns.add(tuple(masks[i] >> w & 1 for i in idx))
        return len(patterns) == 1 << len(idx)

    def grow(chosen, start):
        if len(chosen) == 4:
            return sum(unique[i] for i in chosen) < 3
        used = {pts[i].pair for i in chosen}
        for i in range(start, len(pts)):
            if pts[i].pair in used:
                continue
            nxt = chosen + [i]
            if shattered(nxt) and not grow(nxt, i + 1):
                return False
        return True

    return grow([], 0)


def load_fixture() -> Graph:
    """The bundled 41-node graph whose 4-point set ``FIXTURE_POINTS`` is shattered."""
    text = resources.files("bcsample").joinpath("fixtures/shatter41.txt").read_text()
    return load_edge_list(text.splitlines(), directed=False)


FIXTURE_POINTS = (
    RangePoint((0, 16), Fraction(1)),
    RangePoint((23, 17), Fraction(1)),
    RangePoint((5, 33), Fraction(1, 2)),
    RangePoint((11, 34), Fraction(1, 2)),
)

FIXTURE_TABLE = {
    "": 0, "a": 1, "b": 24, "c": 40, "d": 38,
    "ab": 20, "ac": 2, "ad": 21, "bc": 25, "bd": 27, "cd": 29,
    "abc": 19, "abd": 15, "acd": 22, "bcd": 26, "abcd": 18,
}
