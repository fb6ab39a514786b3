from __future__ import annotations

import random

import networkx as nx
import numpy as np
import pytest

from bcsample.exact import brandes_exact
from bcsample.graph import Graph
from oracles import brute_bc, random_nx, to_graph


class TestSmallGraphs:
    def test_path(self):
        bc = brandes_exact(Graph(3, [(0, 1), (1, 2)]))
        np.testing.assert_allclose(bc, [0, 1 / 3, 0], atol=1e-15)

    def test_star(self):
        bc = brandes_exact(to_graph(nx.star_graph(3)))
        assert bc[0] == pytest.approx(0.5, abs=1e-15)
        assert np.all(bc[1:] == 0)

    @pytest.mark.parametrize("n", [2, 3, 5, 8])
    def test_complete(self, n):
        assert np.all(brandes_exact(to_graph(nx.complete_graph(n))) == 0)

    def test_single_node_rejected(self):
        with pytest.raises(ValueError):
            brandes_exact(Graph(1, []))

    def test_values_in_unit_interval(self):
        bc = brandes_exact(to_graph(nx.star_graph(30)))
        assert bc.max() <= 1.0 and bc.min() >= 0.0


@pytest.mark.parametrize("directed,weighted", [(False, False), (True, False), (False, True), (True, True)])
def test_matches_enumeration(directed, weighted):
    rng = random.Random(17 + 2 * directed + weighted)
    for _ in range(8):
        G = random_nx(rng, rng.randint(2, 30), directed, weighted)
        w = "weight" if weighted else None
        np.testing.assert_allclose(brandes_exact(to_graph(G, w)), brute_bc(G, w), atol=1e-12)


def test_matches_networkx_normalisation():
    # networkx normalises undirected graphs by 2/((n-1)(n-2)) over unordered pairs
    G = nx.karate_club_graph()
    n = G.number_of_nodes()
    ref = nx.betweenness_centrality(G, normalized=False)
    ours = brandes_exact(to_graph(G))
    np.testing.assert_allclose(ours, [2 * ref[v] / (n * (n - 1)) for v in range(n)], atol=1e-12)


def test_undirected_equals_bidirected():
    rng = random.Random(5)
    for _ in range(5):
        G = random_nx(rng, rng.randint(3, 25))
        D = G.to_directed()
        np.testing.assert_allclose(brandes_exact(to_graph(G)), brandes_exact(to_graph(D)), atol=1e-12)
