from __future__ import annotations

import math
import random
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest

from bcsample import bounds
from bcsample.exact import brandes_exact
from bcsample.graph import Graph
from bcsample.sampler import (
    SamplerConfig,
    TopKInfeasible,
    _linear_contribs,
    exhaustive_estimates,
    parse_schedule,
    run,
    run_abra_s,
    run_linear_scaling,
    run_relative,
    run_topk,
    run_unique_sp,
    schedule_trace,
    split_delta,
)
from oracles import random_nx, to_graph


def cfg(eps=0.05, delta=0.1, **kw):
    return SamplerConfig(eps, delta, **kw)


class TestConfig:
    @pytest.mark.parametrize(
        "kw",
        [
            dict(epsilon=0, delta=0.1),
            dict(epsilon=0.1, delta=1),
            dict(epsilon=0.1, delta=0.1, mode="nope"),
            dict(epsilon=0.1, delta=0.1, mode="topk"),
            dict(epsilon=0.1, delta=0.1, mode="topk", k=0),
            dict(epsilon=0.1, delta=0.1, schedule="geometric:1"),
            dict(epsilon=0.1, delta=0.1, schedule="linear"),
            dict(epsilon=0.1, delta=0.1, max_samples=10),
            dict(epsilon=0.1, delta=0.1, seed=-1),
            dict(epsilon=0.1, delta=0.1, seed=1 << 64),
        ],
    )
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            SamplerConfig(**kw)

    def test_schedule_parsing(self):
        assert parse_schedule("adaptive") == "adaptive"
        assert parse_schedule("geometric:3") == ("geometric", 3.0)
        assert cfg(schedule="geometric:2").schedule == ("geometric", 2.0)


class TestAbsolute:
    def test_complete_graph_stops_at_first_check(self):
        res = run_abra_s(to_graph(nx.complete_graph(5)), cfg())
        assert np.all(res.estimates == 0)
        assert res.iterations == 1 and res.sample_size == bounds.initial_sample_size(0.05, 0.1)
        assert res.omega_trace == [0.0] and res.converged

    def test_two_nodes(self):
        res = run_abra_s(Graph(2, [(0, 1)]), cfg())
        assert np.all(res.estimates == 0)

    def test_disconnected_pairs_count_as_samples(self):
        g = Graph(6, [(0, 1), (1, 2), (3, 4), (4, 5)])
        res = run_abra_s(g, cfg(eps=0.1))
        exact = brandes_exact(g)
        assert np.max(np.abs(res.estimates - exact)) <= 0.1

    def test_deterministic(self):
        g = to_graph(nx.gnp_random_graph(60, 0.1, seed=1))
        a, b = run_abra_s(g, cfg(seed=7)), run_abra_s(g, cfg(seed=7))
        assert np.array_equal(a.estimates, b.estimates)
        assert (a.size_trace, a.omega_trace) == (b.size_trace, b.omega_trace)
        assert not np.array_equal(a.estimates, run_abra_s(g, cfg(seed=8)).estimates)

    def test_trace_consistent(self):
        g = to_graph(nx.star_graph(20))
        res = run_abra_s(g, cfg())
        tr = schedule_trace(res)
        sizes = [s for _, s, _, _ in tr]
        assert sizes == sorted(set(sizes)) and sizes[-1] == res.sample_size
        assert tr[-1][3] <= 0.05 and res.final_delta == tr[-1][3]
        assert abs(sum(res.runtime_breakdown.values()) - 100) < 0.1

    def test_geometric_schedule_doubles(self):
        g = to_graph(nx.star_graph(20))
        res = run_abra_s(g, cfg(schedule="geometric:2"))
        s1 = bounds.initial_sample_size(0.05, 0.1)
        assert res.iterations >= 2
        assert res.size_trace == [s1 * 2**i for i in range(res.iterations)]

    def test_cap_flags_not_converged(self):
        g = to_graph(nx.star_graph(20))
        s1 = bounds.initial_sample_size(0.01, 0.1)
        res = run_abra_s(g, cfg(eps=0.01, max_samples=s1))
        assert res.not_converged and res.sample_size == s1
        assert res.final_delta > 0.01

    def test_error_within_eps_on_random_graph(self):
        g = to_graph(nx.gnp_random_graph(50, 0.1, seed=4))
        exact = brandes_exact(g)
        for seed in range(10):
            res = run_abra_s(g, cfg(seed=seed))
            assert np.max(np.abs(res.estimates - exact)) <= 0.05

    def test_run_dispatch(self):
        g = to_graph(nx.path_graph(4))
        assert run(g, cfg(eps=0.1, mode="linear_scaling")).mode == "linear_scaling"
        assert run(g, cfg(eps=0.1, mode="unique_sp")).mode == "unique_sp"


class TestExhaustive:
    def test_absolute_unbiased(self):
        rng = random.Random(11)
        for _ in range(10):
            G = random_nx(rng, rng.randint(2, 25), directed=rng.random() < 0.5)
            g = to_graph(G)
            np.testing.assert_allclose(exhaustive_estimates(g), brandes_exact(g), atol=1e-12)

    def test_linear_unbiased(self):
        rng = random.Random(12)
        for _ in range(10):
            G = random_nx(rng, rng.randint(2, 20), directed=rng.random() < 0.5, weighted=rng.random() < 0.5)
            g = to_graph(G, "weight" if G.number_of_edges() and "weight" in next(iter(G.edges(data=True)))[2] else None)
            np.testing.assert_allclose(exhaustive_estimates(g, "linear_scaling"), brandes_exact(g), atol=1e-12)


class TestLinearScaling:
    def test_path_midpoint(self):
        g = Graph(3, [(0, 1), (1, 2)])
        for fwd in (True, False):
            (w, num, den), = _linear_contribs(g, 0, 2, fwd)
            assert w == 1 and Fraction(num, den) == Fraction(1, 2)

    def test_diamond(self):
        g = Graph(4, [(0, 1), (0, 2), (1, 3), (2, 3)], directed=True)
        got = {w: Fraction(a, b) for w, a, b in _linear_contribs(g, 0, 3, True)}
        assert got == {1: Fraction(1, 4), 2: Fraction(1, 4)}

    def test_weighted_ratio(self):
        g = Graph(3, [(0, 1, 1.0), (1, 2, 3.0)])
        (w, num, den), = _linear_contribs(g, 0, 2, True)
        assert Fraction(num, den) == Fraction(1, 4)
        (w, num, den), = _linear_contribs(g, 0, 2, False)
        assert Fraction(num, den) == Fraction(3, 4)

    def test_runs_and_is_accurate(self):
        g = to_graph(nx.gnp_random_graph(40, 0.15, seed=2))
        res = run_linear_scaling(g, cfg(eps=0.05))
        assert res.converged and res.final_delta <= 0.05
        assert np.max(np.abs(res.estimates - brandes_exact(g))) <= 0.05
        assert bounds.delta_ls(res.omega_trace[-1], res.sample_size, 0.1) == res.final_delta


class TestUniqueSp:
    @pytest.mark.parametrize("eps,r", [(0.05, 1061), (0.1, 266)])
    def test_sizes(self, eps, r):
        res = run_unique_sp(to_graph(nx.path_graph(10)), cfg(eps=eps))
        assert res.sample_size == r and res.iterations == 1

    def test_tree_accuracy(self):
        T = nx.random_labeled_tree(60, seed=3)
        g = to_graph(T)
        exact = brandes_exact(g)
        # the guarantee is per run with probability 1 - delta
        ok = sum(np.max(np.abs(run_unique_sp(g, cfg(seed=s)).estimates - exact)) <= 0.05 for s in range(20))
        assert ok >= 18


class TestRelative:
    def test_zero_vectors_initial_size(self):
        g = to_graph(nx.complete_graph(6))
        lam = 0.2
        res = run_relative(g, cfg(eps=0.1), lam)
        L = math.log(2 / 0.1)
        assert res.sample_size == math.ceil(9 * L / (2 * lam**2 * 0.1**2))
        assert res.converged

    def test_guarantee(self):
        g = to_graph(nx.star_graph(8))
        exact = brandes_exact(g)
        lam = 0.3
        res = run_relative(g, cfg(eps=0.1, seed=3), lam)
        rel = np.abs(res.estimates - exact) / np.maximum(lam, exact)
        assert rel.max() <= 0.1

    def test_bad_lambda(self):
        with pytest.raises(ValueError):
            run_relative(Graph(3, [(0, 1)]), cfg(), 0.0)


class TestTopK:
    def test_split(self):
        d = split_delta(0.1)
        assert (1 - d) ** 2 == pytest.approx(0.9, abs=1e-15)

    def test_star_center(self):
        g = to_graph(nx.star_graph(5))
        res = run_topk(g, cfg(eps=0.1, mode="topk", k=1))
        assert [w for w, _ in res.entries] == [0]
        exact = brandes_exact(g)[0]
        assert abs(res.entries[0][1] - exact) <= 0.1 * exact
        assert all(b >= res.threshold for _, b in res.entries)

    def test_path_center(self):
        g = to_graph(nx.path_graph(5))
        res = run_topk(g, cfg(eps=0.1, mode="topk", k=1, seed=2))
        assert 2 in [w for w, _ in res.entries]
        ests = [b for _, b in res.entries]
        assert ests == sorted(ests, reverse=True)

    def test_all_positive_nodes_when_k_covers_them(self):
        g = to_graph(nx.path_graph(5))
        res = run_topk(g, cfg(eps=0.1, mode="topk", k=3, seed=1))
        assert {w for w, _ in res.entries} == {1, 2, 3}

    def test_infeasible(self):
        g = to_graph(nx.path_graph(5))
        with pytest.raises(TopKInfeasible, match="epsilon too large for k-th value"):
            run_topk(g, cfg(eps=0.1, mode="topk", k=5))

    def test_superset_frequency(self):
        g = to_graph(nx.balanced_tree(2, 3))
        exact = brandes_exact(g)
        k = 3
        order = sorted(range(g.node_count), key=lambda w: (-exact[w], w))
        bk = exact[order[k - 1]]
        top = {w for w in range(g.node_count) if exact[w] >= bk}
        hits = 0
        for seed in range(20):
            res = run_topk(g, cfg(eps=0.1, delta=0.1, mode="topk", k=k, seed=seed))
            got = {w for w, _ in res.entries}
            hits += top <= got
            for w, b in res.entries:
                if w not in top:
                    assert b <= (1 + 0.1) * bk
        assert hits >= 18
