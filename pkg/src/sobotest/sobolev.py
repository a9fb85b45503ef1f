"""Sobolev statistics for testing uniformity on the sphere: weight
sequences over harmonic degrees, the O(n^2) kernel form and the O(n d)
harmonic form of the statistic, plus the classical special cases."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .harmonics import basis_matrix
from .rotsym import SphericalSample
from .specfun import harmonic_dim

__all__ = [
    "WeightSequence",
    "TruncationInfo",
    "TestResult",
    "stat_kernel",
    "stat_harmonic",
    "rayleigh_stat",
    "bingham_stat",
    "run_test",
]

_TRUNC_REL_TOL = 1e-6
_TRUNC_K_MAX = 600


@dataclass(frozen=True)
class TruncationInfo:
    """Truncation level of an infinite weight sequence at a given p, with
    the bounded tail mass sum_{k > k_trunc} v_k^2 d_{p,k}."""

    k_trunc: int
    tail_mass: float
    total_mass: float


class WeightSequence:
    """Nonnegative weights v_k over harmonic degrees k >= 1, either an
    explicit finite vector or a rule k -> v_k with square-summable mass
    v_k^2 d_{p,k}."""

    def __init__(self, values=None, rule=None, name: Optional[str] = None):
        if (values is None) == (rule is None):
            raise ValueError("provide exactly one of values or rule")
        if values is not None:
            values = tuple(float(v) for v in values)
            if not values or not any(values):
                raise ValueError("finite weight vectors need a nonzero entry")
        self._values = values
        self._rule = rule
        self.name = name
        self._trunc_cache = {}

    @classmethod
    def finite(cls, values, name: Optional[str] = None) -> "WeightSequence":
        return cls(values=values, name=name)

    @classmethod
    def delta(cls, k: int, name: Optional[str] = None) -> "WeightSequence":
        """All weight on degree k."""
        if k < 1:
            raise ValueError(f"degree must be >= 1, got {k}")
        return cls(values=(0.0,) * (k - 1) + (1.0,), name=name or f"delta_{k}")

    @classmethod
    def from_rule(cls, rule, name: Optional[str] = None) -> "WeightSequence":
        return cls(rule=rule, name=name)

    @property
    def kind(self) -> str:
        return "finite" if self._values is not None else "infinite"

    def weight(self, k: int) -> float:
        if k < 1:
            raise ValueError(f"degree must be >= 1, got {k}")
        if self._values is not None:
            return self._values[k - 1] if k <= len(self._values) else 0.0
        return float(self._rule(k))

    @property
    def k_v(self) -> int:
        """Smallest degree with nonzero weight."""
        if self._values is not None:
            for i, v in enumerate(self._values):
                if v != 0.0:
                    return i + 1
        else:
            for k in range(1, _TRUNC_K_MAX + 1):
                if self._rule(k) != 0.0:
                    return k
        raise ValueError("no nonzero weight found")

    @property
    def K_v(self) -> Optional[int]:
        """Largest degree with nonzero weight (finite sequences only)."""
        if self._values is None:
            return None
        for i in range(len(self._values) - 1, -1, -1):
            if self._values[i] != 0.0:
                return i + 1
        raise ValueError("no nonzero weight found")

    def support_through(self, k_max: int) -> list:
        return [k for k in range(1, k_max + 1) if self.weight(k) != 0.0]

    def truncation(self, p: int, rel_tol: float = _TRUNC_REL_TOL) -> TruncationInfo:
        """Choose k_trunc so the neglected mass is below rel_tol of the
        total; geometric tail bound from block ratios.  Raises if the mass
        does not decay."""
        if self._values is not None:
            total = sum(self.weight(k) ** 2 * harmonic_dim(p, k)
                        for k in range(1, len(self._values) + 1))
            return TruncationInfo(self.K_v, 0.0, total)
        key = (p, rel_tol)
        if key in self._trunc_cache:
            return self._trunc_cache[key]
        block = 4
        blocks = []
        total = 0.0
        for start in range(1, _TRUNC_K_MAX + 1, block):
            b = sum(self.weight(k) ** 2 * harmonic_dim(p, k)
                    for k in range(start, start + block))
            blocks.append(b)
            total += b
            if len(blocks) >= 3 and total > 0.0 and blocks[-2] > 0.0:
                r = blocks[-1] / blocks[-2]
                if r < 0.9:
                    tail = blocks[-1] * r / (1.0 - r)
                    if tail < rel_tol * total:
                        info = TruncationInfo(start + block - 1, tail, total)
                        self._trunc_cache[key] = info
                        return info
        raise ValueError(
            "weight sequence mass v_k^2 d_{p,k} does not decay fast enough "
            f"to truncate below {_TRUNC_K_MAX} degrees")

    def active_degrees(self, p: int) -> list:
        """Degrees entering the statistic: the support, truncated for
        infinite sequences."""
        if self._values is not None:
            return self.support_through(len(self._values))
        return self.support_through(self.truncation(p).k_trunc)

    def signature(self, p: int):
        """Structural identity used to match precomputed null laws."""
        return tuple((k, self.weight(k) ** 2) for k in self.active_degrees(p))


def _kernel_weighted_sum(p: int, pairs, s: np.ndarray) -> np.ndarray:
    """sum_k v_k^2 h_{p,k}(s) evaluated in one recurrence sweep; pairs is a
    list of (k, v_k^2) with k >= 1."""
    lam = 0.0 if p == 2 else (p - 2) / 2.0
    top = max(k for k, _ in pairs)
    want = dict(pairs)
    acc = np.zeros_like(s)
    prev = np.ones_like(s)
    cur = s.copy() if p == 2 else 2.0 * lam * s
    for k in range(1, top + 1):
        if k >= 2:
            if p == 2:
                nxt = 2.0 * s * cur - prev
            else:
                nxt = (2.0 * (k - 1 + lam) * s * cur - (k - 2 + 2.0 * lam) * prev) / k
            prev, cur = cur, nxt
        if k in want:
            factor = 2.0 if p == 2 else 1.0 + 2.0 * k / (p - 2)
            acc += want[k] * factor * cur
    return acc


def stat_kernel(sample: SphericalSample, weights: WeightSequence) -> float:
    """Quadratic-form route: (1/n) sum_{i,j} sum_k v_k^2 h_{p,k}(u_i'u_j),
    diagonal included.  O(n^2) pairwise products, evaluated in row blocks."""
    X = sample.points
    n = sample.n
    pairs = [(k, weights.weight(k) ** 2) for k in weights.active_degrees(sample.p)]
    total = 0.0
    block = max(1, min(n, 2_000_000 // max(n, 1)))
    for i0 in range(0, n, block):
        gram = X[i0:i0 + block] @ X.T
        np.clip(gram, -1.0, 1.0, out=gram)
        total += float(_kernel_weighted_sum(sample.p, pairs, gram).sum())
    return total / n


def stat_harmonic(sample: SphericalSample, weights: WeightSequence) -> float:
    """Harmonic route: sum_k v_k^2 || n^(-1/2) sum_i G_k(u_i) ||^2 over the
    active degrees; equal to stat_kernel up to roundoff."""
    X = sample.points
    n = sample.n
    total = 0.0
    for k in weights.active_degrees(sample.p):
        col = basis_matrix(sample.p, k, X).sum(axis=0)
        total += weights.weight(k) ** 2 * float(col @ col) / n
    return total


def rayleigh_stat(sample: SphericalSample) -> float:
    """n p ||mean||^2; the harmonic statistic with all weight on degree 1."""
    mean = sample.points.mean(axis=0)
    return sample.n * sample.p * float(mean @ mean)


def bingham_stat(sample: SphericalSample) -> float:
    """n p(p+2)/2 tr[(S - I/p)^2] for the scatter S; the harmonic statistic
    with all weight on degree 2."""
    p = sample.p
    scatter = sample.points.T @ sample.points / sample.n
    centered = scatter - np.eye(p) / p
    return sample.n * p * (p + 2) / 2.0 * float(np.sum(centered * centered))


@dataclass(frozen=True)
class TestResult:
    """Decision record of one Sobolev test run."""

    __test__ = False  # keep pytest from collecting this as a test class

    test: str
    p: int
    n: int
    statistic: float
    critical_value: float
    alpha: float
    reject: bool
    p_value: float
    p_value_se: float

    def to_record(self) -> str:
        lines = [
            f"test={self.test}",
            f"p={self.p}",
            f"n={self.n}",
            f"statistic={self.statistic:.12g}",
            f"critical_value={self.critical_value:.12g}",
            f"alpha={self.alpha:.12g}",
            f"reject={'true' if self.reject else 'false'}",
            f"p_value={self.p_value:.12g}",
            f"p_value_se={self.p_value_se:.12g}",
        ]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_record(cls, text: str) -> "TestResult":
        kv = {}
        for line in text.strip().splitlines():
            key, _, value = line.partition("=")
            if not _:
                raise ValueError(f"malformed record line: {line!r}")
            kv[key.strip()] = value.strip()
        try:
            return cls(
                test=kv["test"],
                p=int(kv["p"]),
                n=int(kv["n"]),
                statistic=float(kv["statistic"]),
                critical_value=float(kv["critical_value"]),
                alpha=float(kv["alpha"]),
                reject=kv["reject"] == "true",
                p_value=float(kv["p_value"]),
                p_value_se=float(kv["p_value_se"]),
            )
        except KeyError as exc:
            raise ValueError(f"record is missing field {exc}") from exc


def run_test(sample: SphericalSample, weights: WeightSequence, alpha: float,
             law) -> TestResult:
    """Compute the harmonic-form statistic and decide at level alpha using
    the law's upper-alpha critical value; rejection requires a strict
    exceedance.  The p-value comes from the law's tail at the statistic."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    if law.p != sample.p:
        raise ValueError(f"law was built for p={law.p}, sample has p={sample.p}")
    if law.signature != weights.signature(sample.p):
        raise ValueError("law does not match the weight sequence")
    stat = stat_harmonic(sample, weights)
    crit, _ = law.quantile(alpha)
    pval, pval_se = law.tail(stat)
    return TestResult(
        test=weights.name or "sobolev",
        p=sample.p,
        n=sample.n,
        statistic=stat,
        critical_value=crit,
        alpha=alpha,
        reject=bool(stat > crit),
        p_value=pval,
        p_value_se=pval_se,
    )
