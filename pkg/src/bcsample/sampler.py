"""Progressive-sampling betweenness estimation.

Each sample is an ordered pair of distinct nodes (plus a direction for the
linear-scaling estimator). The pair's shortest-path DAG is computed, every
node internal to one of its shortest paths gets a component in its sample
vector, and at each schedule boundary the stopping statistic is compared
with epsilon.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import bounds
from .bounds import VectorSet
from .graph import Graph, backtrack_internal_counts, st_shortest_paths

MODES = ("absolute", "topk", "linear_scaling", "unique_sp")


class TopKInfeasible(ValueError):
    """The first-phase k-th estimate minus epsilon is not positive."""


@dataclass(frozen=True)
class SamplerConfig:
    epsilon: float
    delta: float
    mode: str = "absolute"
    k: int | None = None
    schedule: str | tuple[str, float] = "adaptive"
    seed: int = 0
    max_samples: int | None = None

    def __post_init__(self):
        bounds.check_eps_delta(self.epsilon, self.delta)
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "topk" and (self.k is None or self.k < 1):
            raise ValueError("topk mode needs k >= 1")
        sched = self.schedule
        if isinstance(sched, str):
            sched = parse_schedule(sched)
            object.__setattr__(self, "schedule", sched)
        if sched != "adaptive":
            if not (isinstance(sched, tuple) and sched[0] == "geometric" and sched[1] > 1):
                raise ValueError(f"bad schedule {self.schedule!r}")
        if self.max_samples is not None and self.max_samples < bounds.initial_sample_size(self.epsilon, self.delta):
            raise ValueError("max_samples is below the initial sample size")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def parse_schedule(text: str) -> str | tuple[str, float]:
    """``"adaptive"`` or ``"geometric:<c>"``."""
    if text == "adaptive":
        return "adaptive"
    name, _, c = text.partition(":")
    if name == "geometric":
        try:
            factor = float(c) if c else 2.0
        except ValueError:
            raise ValueError(f"bad geometric factor in {text!r}") from None
        if factor <= 1:
            raise ValueError("geometric factor must exceed 1")
        return ("geometric", factor)
    raise ValueError(f"unknown schedule {text!r}")


@dataclass
class BcResult:
    estimates: np.ndarray
    sample_size: int
    iterations: int
    final_delta: float
    omega_trace: list[float] = field(default_factory=list)
    size_trace: list[int] = field(default_factory=list)
    delta_trace: list[float] = field(default_factory=list)
    runtime_breakdown: dict[str, float] = field(default_factory=dict)
    converged: bool = True
    mode: str = "absolute"

    @property
    def not_converged(self) -> bool:
        return not self.converged


@dataclass
class TopKResult:
    entries: list[tuple[int, float]]
    threshold: float
    phase1_threshold: float
    phase1_size: int
    phase2_size: int
    k: int
    phase1: BcResult | None = None
    phase2: BcResult | None = None


def schedule_trace(result: BcResult) -> list[tuple[int, int, float, float]]:
    """``(iteration, sample size, omega, delta)`` per stopping check."""
    return [
        (i + 1, s, o, d)
        for i, (s, o, d) in enumerate(zip(result.size_trace, result.omega_trace, result.delta_trace))
    ]


# ---- per-sample contributions -------------------------------------------------


def _pair_contribs(g: Graph, u: int, v: int) -> list[tuple[int, int, int]]:
    dag = st_shortest_paths(g, u, v)
    if not dag.reached:
        return []
    tot = dag.sigma_st
    return [(w, c, tot) for w, c in backtrack_internal_counts(dag)]


def _linear_contribs(g: Graph, u: int, v: int, forward: bool) -> list[tuple[int, int, int]]:
    dag = st_shortest_paths(g, u, v)
    if not dag.reached:
        return []
    tot = dag.sigma_st
    dist = dag.dist
    out = []
    if g.weights is None:
        dv = dist[v]
        for w, c in backtrack_internal_counts(dag):
            dw = dist[w] if forward else dv - dist[w]
            out.append((w, c * dw, tot * dv))
    else:
        dv = Fraction(dist[v])
        for w, c in backtrack_internal_counts(dag):
            r = Fraction(dist[w]) / dv
            if not forward:
                r = 1 - r
            r = min(max(r, Fraction(0)), Fraction(1))
            out.append((w, c * r.numerator, tot * r.denominator))
    return out


class _PairStream:
    """Seeded stream of uniform ordered pairs of distinct nodes (with replacement)."""

    def __init__(self, n: int, seed: int, with_direction: bool = False):
        self.n = n
        self.rng = np.random.default_rng(seed)
        self.with_direction = with_direction

    def draw(self, m: int):
        n = self.n
        u = self.rng.integers(0, n, size=m)
        v = self.rng.integers(0, n - 1, size=m)
        v = v + (v >= u)
        if self.with_direction:
            d = self.rng.integers(0, 2, size=m)
            return zip(u.tolist(), v.tolist(), (d == 0).tolist())
        return zip(u.tolist(), v.tolist())


# ---- generic progressive driver -----------------------------------------------


@dataclass
class _Stat:
    """How one estimator variant starts, tests and grows its sample."""

    initial: int
    evaluate: Callable[[VectorSet], tuple[float, float]]  # -> (omega, delta)
    next_adaptive: Callable[[float, int], int]
    scale: float = 1.0


def _progressive(
    g: Graph,
    stat: _Stat,
    eps: float,
    schedule,
    seed: int,
    max_samples: int,
    linear: bool = False,
    mode: str = "absolute",
) -> BcResult:
    n = g.node_count
    if n < 2:
        raise ValueError("sampling needs at least two nodes")
    vs = VectorSet(n)
    stream = _PairStream(n, seed, with_direction=linear)
    t_sample = t_stop = 0.0
    t0 = time.perf_counter()
    sizes, omegas, deltas = [], [], []
    size = min(stat.initial, max_samples)
    converged = False
    while True:
        ts = time.perf_counter()
        m = size - vs.ell
        if linear:
            for u, v, fwd in stream.draw(m):
                vs.update_ratios(_linear_contribs(g, u, v, fwd))
        else:
            for u, v in stream.draw(m):
                vs.update_ratios(_pair_contribs(g, u, v))
        tc = time.perf_counter()
        omega, dlt = stat.evaluate(vs)
        t_stop += time.perf_counter() - tc
        t_sample += tc - ts
        sizes.append(size)
        omegas.append(omega)
        deltas.append(dlt)
        if dlt <= eps:
            converged = True
            break
        if size >= max_samples:
            break
        if schedule == "adaptive":
            nxt = stat.next_adaptive(omega, size)
        else:
            nxt = math.ceil(schedule[1] * size)
        size = min(max(nxt, size + 1), max_samples)
    total = time.perf_counter() - t0
    return BcResult(
        estimates=vs.estimates() * stat.scale,
        sample_size=vs.ell,
        iterations=len(sizes),
        final_delta=deltas[-1],
        omega_trace=omegas,
        size_trace=sizes,
        delta_trace=deltas,
        runtime_breakdown=_breakdown(t_sample, t_stop, total),
        converged=converged,
        mode=mode,
    )


def _breakdown(t_sample: float, t_stop: float, total: float) -> dict[str, float]:
    total = max(total, t_sample + t_stop, 1e-12)
    sampling = 100.0 * t_sample / total
    stop = 100.0 * t_stop / total
    return {"sampling": sampling, "stop_condition": stop, "other": max(0.0, 100.0 - sampling - stop)}


def _default_cap(g: Graph, cfg: SamplerConfig) -> int:
    if cfg.max_samples is not None:
        return cfg.max_samples
    return 100 * bounds.union_bound_sample_size(g.node_count, cfg.epsilon, cfg.delta)


def _absolute_stat(eps: float, delta: float) -> _Stat:
    def evaluate(vs):
        om = bounds.omega_star(vs)
        return om, bounds.delta_abs(om, vs.ell, delta)

    return _Stat(
        initial=bounds.initial_sample_size(eps, delta),
        evaluate=evaluate,
        next_adaptive=lambda om, s: bounds.next_sample_size(om, s, eps, delta),
    )


def _linear_stat(eps: float, delta: float) -> _Stat:
    def evaluate(vs):
        om = bounds.omega_star(vs)
        return om, bounds.delta_ls(om, vs.ell, delta)

    def nxt(om, s):
        if om >= eps:
            return 2 * s
        return bounds.smallest_size(lambda x: bounds.delta_ls(om, x, delta), eps, s + 1)

    return _Stat(
        initial=bounds.smallest_size(lambda x: bounds.delta_ls(0.0, x, delta), eps),
        evaluate=evaluate,
        next_adaptive=nxt,
        scale=2.0,
    )


def _relative_stat(eps: float, delta: float, lam: float) -> _Stat:
    L = math.log(2.0 / delta)

    def evaluate(vs):
        om = bounds.omega_star(vs, lam)
        return om, bounds.delta_rel(om, vs.ell, delta, lam)

    def size_for(gap):
        return math.ceil(9.0 * L / (2.0 * lam * lam * gap * gap))

    def nxt(om, s):
        if 2.0 * om >= eps:
            return 2 * s
        return max(size_for(eps - 2.0 * om), s + 1)

    return _Stat(initial=size_for(eps), evaluate=evaluate, next_adaptive=nxt)


# ---- public drivers ---------------------------------------------------------


def run_abra_s(g: Graph, cfg: SamplerConfig) -> BcResult:
    """Absolute-error estimates: all within epsilon of the truth w.p. >= 1 - delta."""
    return _progressive(
        g, _absolute_stat(cfg.epsilon, cfg.delta), cfg.epsilon, cfg.schedule, cfg.seed, _default_cap(g, cfg)
    )


def run_linear_scaling(g: Graph, cfg: SamplerConfig) -> BcResult:
    """Same guarantee as ``run_abra_s`` using the distance-weighted estimator."""
    return _progressive(
        g,
        _linear_stat(cfg.epsilon, cfg.delta),
        cfg.epsilon,
        cfg.schedule,
        cfg.seed,
        _default_cap(g, cfg),
        linear=True,
        mode="linear_scaling",
    )


def run_relative(g: Graph, cfg: SamplerConfig, lam: float) -> BcResult:
    """Estimates with |est - b| <= epsilon * max(lam, b) for all nodes w.p. >= 1 - delta."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    stat = _relative_stat(cfg.epsilon, cfg.delta, lam)
    cap = cfg.max_samples if cfg.max_samples is not None else max(_default_cap(g, cfg), 100 * stat.initial)
    return _progressive(g, stat, cfg.epsilon, cfg.schedule, cfg.seed, cap, mode="relative")


def run_unique_sp(g: Graph, cfg: SamplerConfig) -> BcResult:
    """Fixed-size sample for graphs whose pseudodimension is at most 3.

    The caller vouches for the hypothesis (at most one pair with two
    shortest paths, every other pair with at most one); nothing is checked.
    """
    r = bounds.unique_sp_sample_size(cfg.epsilon, cfg.delta)
    n = g.node_count
    if n < 2:
        raise ValueError("sampling needs at least two nodes")
    vs = VectorSet(n)
    t0 = time.perf_counter()
    for u, v in _PairStream(n, cfg.seed).draw(r):
        vs.update_ratios(_pair_contribs(g, u, v))
    t1 = time.perf_counter()
    return BcResult(
        estimates=vs.estimates(),
        sample_size=r,
        iterations=1,
        final_delta=cfg.epsilon,
        omega_trace=[math.nan],
        size_trace=[r],
        delta_trace=[cfg.epsilon],
        runtime_breakdown=_breakdown(t1 - t0, 0.0, time.perf_counter() - t0),
        converged=True,
        mode="unique_sp",
    )


def split_delta(delta: float) -> float:
    """Per-phase confidence so that (1 - d)^2 = 1 - delta."""
    return 1.0 - math.sqrt(1.0 - delta)


def _kth_highest(est: Sequence[float], k: int) -> float:
    order = sorted(range(len(est)), key=lambda w: (-est[w], w))
    return float(est[order[min(k, len(est)) - 1]])


def run_topk(g: Graph, cfg: SamplerConfig) -> TopKResult:
    """Superset of the top-k nodes with relative-error estimates.

    Phase one is an absolute-error run; its k-th estimate minus epsilon is
    the floor ``lam`` of the relative-error second phase. Returned entries
    are the nodes whose phase-two estimate reaches (k-th estimate)/(1+eps).
    """
    if cfg.k is None or cfg.k < 1:
        raise ValueError("k must be at least 1")
    d1 = split_delta(cfg.delta)
    base = dict(mode="absolute", schedule=cfg.schedule, max_samples=cfg.max_samples)
    first = run_abra_s(g, SamplerConfig(cfg.epsilon, d1, seed=cfg.seed, **base))
    lam = _kth_highest(first.estimates, cfg.k) - cfg.epsilon
    if lam <= 0:
        raise TopKInfeasible(
            f"epsilon too large for k-th value: k-th estimate {lam + cfg.epsilon:.6g} <= epsilon {cfg.epsilon}"
        )
    seed2 = (cfg.seed + 0x9E3779B97F4A7C15) % (1 << 64)
    second = run_relative(g, SamplerConfig(cfg.epsilon, d1, seed=seed2, **base), lam)
    est = second.estimates
    threshold = _kth_highest(est, cfg.k) / (1.0 + cfg.epsilon)
    entries = [(w, float(est[w])) for w in range(g.node_count) if est[w] >= threshold]
    entries.sort(key=lambda e: (-e[1], e[0]))
    return TopKResult(
        entries=entries,
        threshold=threshold,
        phase1_threshold=lam,
        phase1_size=first.sample_size,
        phase2_size=second.sample_size,
        k=cfg.k,
        phase1=first,
        phase2=second,
    )


def run(g: Graph, cfg: SamplerConfig) -> BcResult | TopKResult:
    """Dispatch on ``cfg.mode``."""
    return {
        "absolute": run_abra_s,
        "linear_scaling": run_linear_scaling,
        "unique_sp": run_unique_sp,
        "topk": run_topk,
    }[cfg.mode](g, cfg)


def exhaustive_estimates(g: Graph, mode: str = "absolute") -> np.ndarray:
    """Estimator averaged over its whole sample space instead of a random sample.

    For ``absolute`` this averages the per-pair fractions over all ordered
    pairs; for ``linear_scaling`` it averages both directions and doubles.
    """
    n = g.node_count
    acc = [Fraction(0)] * n
    count = 0
    for u in range(n):
        for v in range(n):
            if u == v:
                continue
            if mode == "absolute":
                count += 1
                for w, num, den in _pair_contribs(g, u, v):
                    acc[w] += Fraction(num, den)
            elif mode == "linear_scaling":
                for fwd in (True, False):
                    count += 1
                    for w, num, den in _linear_contribs(g, u, v, fwd):
                        acc[w] += Fraction(num, den)
            else:
                raise ValueError(f"unknown estimator {mode!r}")
    scale = 2 if mode == "linear_scaling" else 1
    return np.array([float(scale * a / count) for a in acc])
