"""Deviation bounds, Rademacher-average upper bounds and sample sizes.

The sampler keeps one sparse vector per node (its sampled values, one
component per sample). Only the *set* of distinct vectors matters for the
Rademacher bound, and only their norms are needed, so ``VectorSet`` stores
a structural hash, the l1 norm, the squared l2 norm and a multiplicity
counter per distinct vector.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable

import numpy as np
from scipy.special import logsumexp

# polynomial hash of the (index, num, den) component sequence modulo a Mersenne prime
_MOD = (1 << 127) - 1
_MULT = 0x5DEECE66D_9E3779B97F4A7C15_F39CC060 % _MOD
ZERO_KEY = 1

S_LOW = 1e-6
S_RTOL = 1e-6
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class BoundParams:
    epsilon: float
    delta: float

    def __post_init__(self):
        check_eps_delta(self.epsilon, self.delta)


def check_eps_delta(epsilon: float, delta: float) -> None:
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0, 1), got {delta}")


class _Entry:
    __slots__ = ("l1", "sq", "count")

    def __init__(self, l1: float, sq: float, count: int):
        self.l1 = l1
        self.sq = sq
        self.count = count

    def __repr__(self):
        return f"_Entry(l1={self.l1!r}, sq={self.sq!r}, count={self.count})"


def _canon(g) -> tuple[int, int]:
    if isinstance(g, tuple):
        num, den = g
    elif isinstance(g, Fraction):
        num, den = g.numerator, g.denominator
    elif isinstance(g, int):
        num, den = g, 1
    else:
        num, den = float(g).as_integer_ratio()
    c = gcd(num, den)
    return num // c, den // c


class VectorSet:
    """The set of distinct per-node sample vectors, with norms and counters.

    With ``dense=True`` the full component list of each node is also kept;
    this is only meant for tests and for ``mc_rademacher``.
    """

    def __init__(self, n_nodes: int, dense: bool = False):
        if n_nodes < 1:
            raise ValueError("n_nodes must be positive")
        self.n_nodes = n_nodes
        self.ell = 0
        self.node_key = [ZERO_KEY] * n_nodes
        self.entries: dict[int, _Entry] = {ZERO_KEY: _Entry(0.0, 0.0, n_nodes)}
        self.dense: list[list[float]] | None = [[] for _ in range(n_nodes)] if dense else None

    def update(self, contributions: Iterable[tuple[int, object]]) -> None:
        """Append one sample.

        ``contributions`` holds ``(node, value)`` for nodes with a non-zero
        value in this sample; values may be a ``Fraction``, an int, a float
        or a ``(numerator, denominator)`` tuple, and must lie in [0, 1].
        """
        self._apply([(w, *_canon(g)) for w, g in contributions])

    def update_ratios(self, contributions: Iterable[tuple[int, int, int]]) -> None:
        """Like ``update`` with values given as ``(node, numerator, denominator)``."""
        self._apply(contributions)

    def _apply(self, contributions) -> None:
        j = self.ell
        entries = self.entries
        node_key = self.node_key
        seen = set()
        for w, num, den in contributions:
            if w in seen:
                raise ValueError(f"node {w} contributes twice to sample {j}")
            seen.add(w)
            if num < 0 or den <= 0 or num > den:
                raise ValueError(f"value {num}/{den} for node {w} is outside [0, 1]")
            if num == 0:
                continue
            c = gcd(num, den)
            num //= c
            den //= c
            g = num / den
            old_key = node_key[w]
            old = entries[old_key]
            new_key = (((old_key * _MULT + j) * _MULT + num) * _MULT + den) % _MOD
            ent = entries.get(new_key)
            if ent is None:
                entries[new_key] = _Entry(old.l1 + g, old.sq + g * g, 1)
            else:
                ent.count += 1
            node_key[w] = new_key
            if old.count > 1:
                old.count -= 1
            else:
                del entries[old_key]
            if self.dense is not None:
                vec = self.dense[w]
                vec.extend([0.0] * (j - len(vec)))
                vec.append(g)
        self.ell = j + 1

    def l1(self, w: int) -> float:
        return self.entries[self.node_key[w]].l1

    def sq_l2(self, w: int) -> float:
        return self.entries[self.node_key[w]].sq

    def estimates(self) -> np.ndarray:
        """Sample mean of each node's values, ``l1 / ell``."""
        if self.ell == 0:
            return np.zeros(self.n_nodes)
        l1 = np.array([self.entries[k].l1 for k in self.node_key])
        return l1 / self.ell

    def sq_norms(self) -> np.ndarray:
        """Squared l2 norm of every distinct vector."""
        return np.fromiter((e.sq for e in self.entries.values()), float, len(self.entries))

    def dense_matrix(self) -> np.ndarray:
        """Distinct vectors as rows of an ``(k, ell)`` array (dense mode only)."""
        if self.dense is None:
            raise ValueError("VectorSet was built without dense storage")
        rows = {}
        for w, vec in enumerate(self.dense):
            full = tuple(vec) + (0.0,) * (self.ell - len(vec))
            rows.setdefault(self.node_key[w], full)
        if not rows:
            return np.zeros((1, self.ell))
        return np.array(list(rows.values()), dtype=float).reshape(len(rows), self.ell)

    def __len__(self) -> int:
        return len(self.entries)


def rademacher_objective(s: float, sq_norms: np.ndarray, ell: int, lam: float = 1.0) -> float:
    """(1/s) ln sum_v exp(s^2 |v|^2 / (lam * 2 ell^2))."""
    a = np.asarray(sq_norms, dtype=float) / (lam * 2.0 * ell * ell)
    return float(logsumexp(s * s * a)) / s


def _golden(f, lo: float, hi: float, rtol: float) -> tuple[float, float]:
    x1 = hi - _INVPHI * (hi - lo)
    x2 = lo + _INVPHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > rtol * max(abs(x1), S_LOW):
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INVPHI * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INVPHI * (hi - lo)
            f2 = f(x2)
    return (x1, f1) if f1 <= f2 else (x2, f2)


def minimize_objective(sq_norms: np.ndarray, ell: int, lam: float = 1.0) -> float:
    """min over s > 0 of ``rademacher_objective``."""
    if ell < 1:
        raise ValueError("ell must be at least 1")
    if lam <= 0:
        raise ValueError("lambda must be positive")
    sq = np.asarray(sq_norms, dtype=float)
    if sq.size == 0 or not np.any(sq > 0):
        # only the zero vector: the objective is ln(1)/s = 0
        return 0.0

    def f(s):
        return rademacher_objective(s, sq, ell, lam)

    hi = 1.0
    f_hi = f(hi)
    grew = False
    while hi < 1e300:
        f_next = f(2.0 * hi)
        if f_next >= f_hi:
            break
        hi, f_hi = 2.0 * hi, f_next
        grew = True
    else:
        # decreasing over the whole expanded bracket
        return max(f_hi, 0.0)
    lo = hi / 2.0 if grew else S_LOW
    _, val = _golden(f, lo, 2.0 * hi, S_RTOL)
    return max(min(val, f(S_LOW)), 0.0)


def omega_star(vs: VectorSet, lam: float = 1.0) -> float:
    """Upper bound on the conditional Rademacher average of the sample.

    With ``lam != 1`` the squared norms are divided by ``lam``, which gives
    the minimized term of the relative-error stopping statistic.
    """
    if vs.ell == 0:
        raise ValueError("omega_star needs at least one sample")
    return minimize_objective(vs.sq_norms(), vs.ell, lam)


def mc_rademacher(vs: VectorSet, trials: int, seed: int, with_stderr: bool = False):
    """Monte-Carlo estimate of E_sigma[ sup_v (1/ell) sum_i sigma_i v_i ].

    Needs dense storage. Returns the mean, or ``(mean, stderr)``.
    """
    if vs.dense is None:
        raise ValueError("mc_rademacher needs a VectorSet built with dense=True")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    mat = vs.dense_matrix()
    ell = vs.ell
    rng = np.random.default_rng(seed)
    sups = np.empty(trials)
    chunk = max(1, min(trials, 2_000_000 // max(ell, 1)))
    for start in range(0, trials, chunk):
        m = min(chunk, trials - start)
        signs = rng.integers(0, 2, size=(m, ell), dtype=np.int8) * 2 - 1
        sups[start:start + m] = (signs @ mat.T).max(axis=1) / ell
    mean = float(sups.mean())
    if with_stderr:
        se = float(sups.std(ddof=1) / math.sqrt(trials)) if trials > 1 else float("inf")
        return mean, se
    return mean


def alpha(omega: float, ell: int, delta: float) -> float:
    L = math.log(2.0 / delta)
    return L / (L + math.sqrt((2.0 * ell * omega + L) * L))


def delta_abs(omega: float, ell: int, delta: float) -> float:
    """Absolute-error stopping statistic: sampling may stop once it is <= epsilon."""
    L = math.log(2.0 / delta)
    a = alpha(omega, ell, delta)
    return omega / (1.0 - a) + L / (2.0 * ell * a * (1.0 - a)) + math.sqrt(L / (2.0 * ell))


def delta_abs_simple(omega: float, ell: int, delta: float) -> float:
    """The classical bound 2*omega + 3*sqrt(ln(2/delta) / (2 ell)); for reports only."""
    return 2.0 * omega + 3.0 * math.sqrt(math.log(2.0 / delta) / (2.0 * ell))


def delta_ls(omega: float, ell: int, delta: float) -> float:
    """Stopping statistic for the linear-scaling estimator (values doubled)."""
    L = math.log(2.0 / delta)
    a = alpha(omega, ell, delta)
    return omega / (1.0 - a) + L / (2.0 * ell * a * (1.0 - a)) + math.sqrt(2.0 * L / ell)


def delta_rel(omega_rel: float, ell: int, delta: float, lam: float) -> float:
    """Relative-error stopping statistic.

    ``omega_rel`` is ``omega_star(vs, lam)``; the result bounds the largest
    ``|estimate - exact| / max(lam, exact)``.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    return 2.0 * omega_rel + (3.0 / lam) * math.sqrt(math.log(2.0 / delta) / (2.0 * ell))


def initial_sample_size(eps: float, delta: float) -> int:
    """Smallest sample size at which the stopping condition can hold with omega = 0."""
    check_eps_delta(eps, delta)
    L = math.log(2.0 / delta)
    return math.ceil((1.0 + 8.0 * eps + math.sqrt(1.0 + 16.0 * eps)) * L / (4.0 * eps * eps))


def cubic_roots(omega: float, eps: float, delta: float) -> list[float]:
    """Closed-form real roots of the next-sample-size cubic (omega != eps)."""
    L = math.log(2.0 / delta)
    A = 1.0 + 4.0 * eps
    z = 48.0 * omega + A * A
    w = -1.0 - 12.0 * eps + 8.0 * (27.0 * omega**2 + (21.0 - 8.0 * eps) * eps**2 + 18.0 * omega * (1.0 + eps))
    rad = -(27.0 * omega**2 - eps**2 * (1.0 + 16.0 * eps) - omega * (1.0 + 18.0 * eps))
    y = 12.0 * math.sqrt(3.0) * abs(-1.0 + 2.0 * omega + 2.0 * eps) * math.sqrt(max(rad, 0.0))
    theta = cmath.phase(complex(-w, y)) / 3.0
    sz = math.sqrt(z)
    scale = L / (omega - eps) ** 2
    c, s3 = math.cos(theta), math.sqrt(3.0) * math.sin(theta)
    return [
        scale * (A - sz * c) / 3.0,
        scale * (2.0 * A + sz * (c + s3)) / 6.0,
        scale * (2.0 * A + sz * (c - s3)) / 6.0,
    ]


def next_sample_size(omega_i: float, s_i: int, eps: float, delta: float) -> int:
    """Adaptive schedule: smallest size at which the stop test would pass if omega stayed put.

    Falls back to doubling when ``omega_i >= eps`` (no finite size works) or
    when no root of the cubic satisfies the stopping inequality.
    """
    if omega_i < 0:
        raise ValueError("omega must be non-negative")
    if omega_i >= eps:
        return 2 * s_i
    for r in sorted(r for r in cubic_roots(omega_i, eps, delta) if r > 0):
        size = math.ceil(r)
        if delta_abs(omega_i, size, delta) <= eps:
            return max(size, s_i + 1)
    return 2 * s_i


def union_bound_sample_size(n_nodes: int, eps: float, delta: float) -> int:
    """Hoeffding plus union-bound sample size, for comparison only."""
    return math.ceil(math.log(2.0 * n_nodes / delta) / (2.0 * eps * eps))


def unique_sp_sample_size(eps: float, delta: float, c: float = 0.5) -> int:
    """Fixed sample size when the pseudodimension is at most 3."""
    return math.ceil(c / (eps * eps) * (3.0 + math.log(1.0 / delta)))


def smallest_size(stat, eps: float, lo: int = 1) -> int:
    """Smallest integer ``S >= lo`` with ``stat(S) <= eps`` for a decreasing ``stat``."""
    if stat(lo) <= eps:
        return lo
    hi = max(2 * lo, 2)
    while stat(hi) > eps:
        lo, hi = hi, 2 * hi
        if hi > 1 << 62:
            raise ValueError("no finite sample size satisfies the bound")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if stat(mid) <= eps:
            hi = mid
        else:
            lo = mid
    return hi
