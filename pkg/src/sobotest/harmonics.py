"""Real orthonormal spherical-harmonic bases on the unit sphere in R^p,
built from hyperspherical coordinates, and the reproducing (addition)
kernel of each degree-k harmonic space."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .specfun import gegenbauer_eval, harmonic_dim

__all__ = [
    "HarmonicVector",
    "to_hyperspherical",
    "from_hyperspherical",
    "basis_eval",
    "basis_matrix",
    "addition_kernel",
]

_NORM_TOL = 1e-9
_POLE_EPS = 1e-15


@dataclass(frozen=True)
class HarmonicVector:
    """Values (g_{1,k}(x), ..., g_{d,k}(x)) of the orthonormal degree-k
    basis at one point."""

    p: int
    k: int
    values: np.ndarray


def _check_points(x: np.ndarray, p: int) -> None:
    norms = np.einsum("ij,ij->i", x, x)
    if np.any(np.abs(norms - 1.0) > 2.0 * _NORM_TOL):
        raise ValueError("points must lie on the unit sphere (norm tolerance 1e-9)")


def to_hyperspherical(x) -> np.ndarray:
    """Angles (theta_1, ..., theta_{p-1}) of a point on the sphere:
    theta_1 in [0, 2*pi), the rest in [0, pi].  At the poles the
    undetermined lower angles are set to 0."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("expected a single point in R^p, p >= 2")
    p = x.size
    _check_points(x[None, :], p)
    theta = np.zeros(p - 1)
    radial = 1.0
    for a in range(p - 1, 1, -1):
        c = x[a] / radial if radial > _POLE_EPS else 1.0
        c = min(1.0, max(-1.0, c))
        theta[a - 1] = math.acos(c)
        radial *= math.sin(theta[a - 1])
    theta[0] = math.atan2(x[0], x[1]) % (2.0 * math.pi)
    if radial <= _POLE_EPS:
        theta[0] = 0.0
    return theta


def from_hyperspherical(theta) -> np.ndarray:
    """Inverse chart: x_p = cos theta_{p-1}, and lower coordinates carry
    the accumulated sine product, ending in (sin theta_1, cos theta_1)."""
    theta = np.asarray(theta, dtype=float)
    p = theta.size + 1
    if p < 2:
        raise ValueError("need at least one angle")
    x = np.zeros(p)
    radial = 1.0
    for a in range(p - 1, 0, -1):
        x[a] = radial * math.cos(theta[a - 1])
        radial *= math.sin(theta[a - 1])
    x[0] = radial
    return x


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _log_pochhammer(a: float, n: int) -> float:
    return math.lgamma(a + n) - math.lgamma(a)


@dataclass(frozen=True)
class _BasisEntry:
    degrees: tuple        # m_1 .. m_{p-2}, Gegenbauer degree per level
    lams: tuple           # lambda_j per level
    sin_powers: tuple     # |m^(j+1)| per level
    trig_multiple: int    # m_{p-1}
    odd_branch: bool      # m_p = 1 selects the sine branch
    sqrt_b: float


@lru_cache(maxsize=None)
def _basis_table(p: int, k: int) -> tuple:
    """Multi-index table of the degree-k basis for p >= 3, ordered
    lexicographically descending so (k, 0, ..., 0) comes first."""
    members = []
    for last in (0, 1):
        if k - last < 0:
            continue
        for comp in _compositions(k - last, p - 1):
            members.append(comp + (last,))
    members.sort(reverse=True)
    entries = []
    for m in members:
        tails = [sum(m[j:]) for j in range(p)]          # tails[j] = |m^(j+1)|
        lams = tuple(tails[j] + (p - j - 1) / 2.0 for j in range(1, p - 1))
        log_b = math.log(2.0) if (m[p - 2] + m[p - 1]) > 0 else 0.0
        for j in range(1, p - 1):                        # level j, 1-indexed
            deg = m[j - 1]
            tail = tails[j]
            lam = lams[j - 1]
            log_b += (
                math.lgamma(deg + 1)
                + _log_pochhammer((p - j + 1) / 2.0, tail)
                + math.log(deg + lam)
                - _log_pochhammer(2.0 * lam, deg)
                - _log_pochhammer((p - j) / 2.0, tail)
                - math.log(lam)
            )
        entries.append(_BasisEntry(
            degrees=tuple(m[:p - 2]),
            lams=lams,
            sin_powers=tuple(sum(m[j:]) for j in range(1, p - 1)),
            trig_multiple=m[p - 2],
            odd_branch=bool(m[p - 1]),
            sqrt_b=math.exp(0.5 * log_b),
        ))
    if len(entries) != harmonic_dim(p, k):
        raise AssertionError("multi-index enumeration does not match d_{p,k}")
    return tuple(entries)


def _angle_trig(X: np.ndarray, p: int):
    """Per-level cosines/sines (level j holds angle theta_{p-j}) plus the
    trig pair of theta_1, all without calling arccos."""
    n = X.shape[0]
    cos_lv = []
    sin_lv = []
    radial = np.ones(n)
    for a in range(p - 1, 1, -1):
        safe = radial > _POLE_EPS
        c = np.where(safe, X[:, a] / np.where(safe, radial, 1.0), 1.0)
        np.clip(c, -1.0, 1.0, out=c)
        s = np.sqrt(np.maximum(0.0, 1.0 - c * c))
        cos_lv.append(c)
        sin_lv.append(s)
        radial = radial * s
    safe = radial > _POLE_EPS
    cos1 = np.where(safe, X[:, 1] / np.where(safe, radial, 1.0), 1.0)
    sin1 = np.where(safe, X[:, 0] / np.where(safe, radial, 1.0), 0.0)
    np.clip(cos1, -1.0, 1.0, out=cos1)
    np.clip(sin1, -1.0, 1.0, out=sin1)
    return cos_lv, sin_lv, cos1, sin1


def _trig_multiples(cos1: np.ndarray, sin1: np.ndarray, top: int):
    n = cos1.size
    cosm = np.empty((top + 1, n))
    sinm = np.empty((top + 1, n))
    cosm[0] = 1.0
    sinm[0] = 0.0
    if top >= 1:
        cosm[1] = cos1
        sinm[1] = sin1
        for m in range(2, top + 1):
            cosm[m] = cosm[m - 1] * cos1 - sinm[m - 1] * sin1
            sinm[m] = sinm[m - 1] * cos1 + cosm[m - 1] * sin1
    return cosm, sinm


def _gegen_all_degrees(lam: float, top: int, t: np.ndarray) -> np.ndarray:
    """All C_q^lam(t) for q = 0..top in one recurrence sweep (lam > 0)."""
    out = np.empty((top + 1, t.size))
    out[0] = 1.0
    if top >= 1:
        out[1] = 2.0 * lam * t
        for q in range(2, top + 1):
            out[q] = (2.0 * (q - 1 + lam) * t * out[q - 1]
                      - (q - 2 + 2.0 * lam) * out[q - 2]) / q
    return out


def basis_matrix(p: int, k: int, X) -> np.ndarray:
    """Evaluate the degree-k orthonormal basis at each row of X; returns an
    (n, d_{p,k}) array whose column order matches basis_eval."""
    if k < 1:
        raise ValueError(f"degree must be >= 1, got {k}")
    X = np.ascontiguousarray(np.asarray(X, dtype=float))
    if X.ndim != 2 or X.shape[1] != p or p < 2:
        raise ValueError("X must be an (n, p) array with p >= 2")
    _check_points(X, p)

    if p == 2:
        cosm, sinm = _trig_multiples(X[:, 1], X[:, 0], k)
        out = np.empty((X.shape[0], 2))
        out[:, 0] = math.sqrt(2.0) * cosm[k]
        out[:, 1] = math.sqrt(2.0) * sinm[k]
        return out

    entries = _basis_table(p, k)
    cos_lv, sin_lv, cos1, sin1 = _angle_trig(X, p)
    top_multiple = max(e.trig_multiple + (1 if e.odd_branch else 0) for e in entries)
    cosm, sinm = _trig_multiples(cos1, sin1, top_multiple)

    # evaluate each distinct (level, lambda) once, up to its max degree
    needed = {}
    for e in entries:
        for j, (deg, lam) in enumerate(zip(e.degrees, e.lams)):
            key = (j, lam)
            needed[key] = max(needed.get(key, 0), deg)
    gegen = {key: _gegen_all_degrees(key[1], top, cos_lv[key[0]])
             for key, top in needed.items()}

    sin_pows = [{} for _ in range(p - 2)]

    def sin_power(level: int, power: int) -> np.ndarray:
        memo = sin_pows[level]
        if power not in memo:
            memo[power] = sin_lv[level] ** power
        return memo[power]

    out = np.empty((X.shape[0], len(entries)))
    for idx, e in enumerate(entries):
        if e.odd_branch:
            col = e.sqrt_b * sinm[e.trig_multiple + 1]
        else:
            col = e.sqrt_b * cosm[e.trig_multiple]
        for j, (deg, lam) in enumerate(zip(e.degrees, e.lams)):
            col = col * sin_power(j, e.sin_powers[j])
            col = col * gegen[(j, lam)][deg]
        out[:, idx] = col
    return out


def basis_eval(p: int, k: int, x) -> HarmonicVector:
    """Orthonormal degree-k basis evaluated at one point."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("expected a single point; use basis_matrix for batches")
    values = basis_matrix(p, k, x[None, :])[0]
    return HarmonicVector(p, k, values)


def addition_kernel(p: int, k: int, s):
    """Reproducing kernel h_{p,k}(s) = sum_r g_{r,k}(u) g_{r,k}(v) at
    s = u'v: the degree-k Gegenbauer (Chebyshev for p = 2) polynomial
    scaled by 2 for p = 2 and by 1 + 2k/(p-2) otherwise."""
    if p < 2:
        raise ValueError(f"p must be >= 2, got {p}")
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    if k == 0:
        return np.ones_like(np.asarray(s, dtype=float)) if np.ndim(s) else 1.0
    if p == 2:
        return 2.0 * gegenbauer_eval(0.0, k, s)
    return (1.0 + 2.0 * k / (p - 2)) * gegenbauer_eval((p - 2) / 2.0, k, s)
