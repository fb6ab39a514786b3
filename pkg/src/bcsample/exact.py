"""Exact betweenness centrality by dependency accumulation (Brandes)."""
from __future__ import annotations

import heapq
from collections import deque

import numpy as np

from .graph import DIST_TOL, Graph


def brandes_exact(g: Graph) -> np.ndarray:
    """Normalized betweenness of every node.

    Values are divided by n(n-1), the number of ordered pairs of distinct
    nodes, so they lie in [0, 1] for directed and undirected graphs alike.
    """
    n = g.node_count
    if n < 2:
        raise ValueError("betweenness needs at least two nodes")
    bc = np.zeros(n)
    for s in range(n):
        if g.weights is None:
            order, preds, sigma = _sssp_bfs(g, s)
        else:
            order, preds, sigma = _sssp_dijkstra(g, s)
        dep = [0.0] * n
        for w in reversed(order):
            coeff = (1.0 + dep[w]) / sigma[w]
            for z in preds[w]:
                dep[z] += sigma[z] * coeff
            if w != s:
                bc[w] += dep[w]
    return bc / (n * (n - 1))


def _sssp_bfs(g: Graph, s: int):
    n = g.node_count
    dist = [-1] * n
    sigma = [0] * n
    preds: list[list[int]] = [[] for _ in range(n)]
    dist[s] = 0
    sigma[s] = 1
    order = []
    q = deque([s])
    while q:
        x = q.popleft()
        order.append(x)
        for y in g.adj[x]:
            if dist[y] < 0:
                dist[y] = dist[x] + 1
                q.append(y)
            if dist[y] == dist[x] + 1:
                sigma[y] += sigma[x]
                preds[y].append(x)
    return order, preds, sigma


def _sssp_dijkstra(g: Graph, s: int):
    n = g.node_count
    dist = [float("inf")] * n
    sigma = [0] * n
    preds: list[list[int]] = [[] for _ in range(n)]
    done = [False] * n
    dist[s] = 0.0
    sigma[s] = 1
    order = []
    heap = [(0.0, s)]
    while heap:
        d, x = heapq.heappop(heap)
        if done[x]:
            continue
        done[x] = True
        order.append(x)
        for y, w in zip(g.adj[x], g.weights[x]):
            if done[y]:
                continue
            nd = d + w
            if nd < dist[y] - DIST_TOL:
                dist[y] = nd
                sigma[y] = sigma[x]
                preds[y] = [x]
                heapq.heappush(heap, (nd, y))
            elif abs(nd - dist[y]) <= DIST_TOL:
                sigma[y] += sigma[x]
                preds[y].append(x)
    return order, preds, sigma
