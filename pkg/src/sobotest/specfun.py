"""Gegenbauer/Chebyshev polynomials, harmonic dimensions and moment
constants used throughout the package, plus Gauss-Jacobi quadrature for
the weight (1 - s^2)^((p-3)/2) on (-1, 1)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

__all__ = [
    "MAX_DEGREE",
    "harmonic_dim",
    "t_factor",
    "null_moment",
    "surface_constant",
    "gegenbauer_eval",
    "gegenbauer_coeffs",
    "GegenCoeffTable",
    "monomial_to_gegenbauer",
    "gauss_jacobi_rule",
    "QuadratureRule",
]

# Coefficient tables and basis conversions are capped here; the evaluation
# recurrences themselves are stable and carry no cap.
MAX_DEGREE = 30

_EVAL_SLACK = 1e-12


def harmonic_dim(p: int, k: int) -> int:
    """Dimension of the space of degree-k spherical harmonics in R^p.

    Exact integer arithmetic; k = 0 gives 1, and p = 2 gives 2 for all
    k >= 1.
    """
    if p < 2:
        raise ValueError(f"p must be >= 2, got {p}")
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    if k == 0:
        return 1
    first = math.comb(p + k - 1, k)
    second = math.comb(p + k - 3, k - 2) if k >= 2 else 0
    return first - second


def t_factor(p: int, k: int) -> float:
    """Normalization factor linking the degree-k Gegenbauer polynomial to
    the orthonormal harmonic basis: sqrt(2) for p = 2, else
    (1 + 2k/(p-2)) / sqrt(d_{p,k})."""
    if p < 2:
        raise ValueError(f"p must be >= 2, got {p}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if p == 2:
        return math.sqrt(2.0)
    return (1.0 + 2.0 * k / (p - 2)) / math.sqrt(harmonic_dim(p, k))


def null_moment(p: int, m: int) -> float:
    """m-th moment of u'theta under the uniform law on the sphere in R^p.

    Zero for odd m; for even m the product prod_{r<m/2} (1+2r)/(p+2r).
    """
    if p < 2:
        raise ValueError(f"p must be >= 2, got {p}")
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    if m % 2 == 1:
        return 0.0
    num = 1
    den = 1
    for r in range(m // 2):
        num *= 1 + 2 * r
        den *= p + 2 * r
    return num / den


def surface_constant(p: int) -> float:
    """Normalizing constant c_p = Gamma(p/2) / (sqrt(pi) Gamma((p-1)/2)) of
    the density of u'theta under uniformity."""
    if p < 2:
        raise ValueError(f"p must be >= 2, got {p}")
    return math.gamma(p / 2.0) / (math.sqrt(math.pi) * math.gamma((p - 1) / 2.0))


def _clamp_argument(t):
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1.0 + _EVAL_SLACK):
        raise ValueError("polynomial argument outside [-1 - 1e-12, 1 + 1e-12]")
    return np.clip(t, -1.0, 1.0)


def gegenbauer_eval(lam: float, q: int, t):
    """Evaluate C_q^lam(t) by the three-term recurrence.

    lam = 0 follows the Chebyshev convention with C_q^0(1) = 1 for all q
    (no factor 2; callers that need the degree-k kernel apply it).  Accepts
    scalars or arrays; |t| may exceed 1 by at most 1e-12 and is clamped.
    """
    if q < 0:
        raise ValueError(f"degree must be >= 0, got {q}")
    lam = float(lam)
    if lam < 0.0:
        raise ValueError(f"lam must be >= 0, got {lam}")
    t = _clamp_argument(t)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)

    prev = np.ones_like(t)
    if q == 0:
        out = prev
    else:
        cur = t.copy() if lam == 0.0 else 2.0 * lam * t
        for j in range(2, q + 1):
            if lam == 0.0:
                nxt = 2.0 * t * cur - prev
            else:
                nxt = (2.0 * (j - 1 + lam) * t * cur - (j - 2 + 2.0 * lam) * prev) / j
            prev, cur = cur, nxt
        out = cur
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class GegenCoeffTable:
    """Monomial coefficients of C_q^lam: the polynomial equals
    sum_j (-1)^j c_j t^(q-2j), j = 0..floor(q/2)."""

    lam: float
    q: int
    coeffs: tuple

    def eval(self, t):
        """Evaluate from the coefficient table (reference path; the
        recurrence in gegenbauer_eval is the production path)."""
        t = _clamp_argument(t)
        out = np.zeros_like(np.atleast_1d(t))
        tt = np.atleast_1d(t)
        for j, c in enumerate(self.coeffs):
            out += (-1) ** j * c * tt ** (self.q - 2 * j)
        return float(out[0]) if np.ndim(t) == 0 else out


def _pochhammer(a: Fraction, n: int) -> Fraction:
    out = Fraction(1)
    for i in range(n):
        out *= a + i
    return out


def _coeffs_exact(lam: Fraction, q: int) -> list:
    """Exact rational monomial coefficients c_j (without the (-1)^j sign)."""
    if lam == 0:
        if q == 0:
            return [Fraction(1)]
        return [
            Fraction(2) ** (q - 2 * j - 1) * q * math.factorial(q - j - 1)
            / (math.factorial(j) * math.factorial(q - 2 * j))
            for j in range(q // 2 + 1)
        ]
    return [
        Fraction(2) ** (q - 2 * j) * _pochhammer(lam, q - j)
        / (math.factorial(j) * math.factorial(q - 2 * j))
        for j in range(q // 2 + 1)
    ]


def gegenbauer_coeffs(lam, q: int) -> GegenCoeffTable:
    """Monomial coefficient table of C_q^lam, computed in exact rational
    arithmetic and rounded once at the end.  Degrees are capped at
    MAX_DEGREE."""
    if q < 0:
        raise ValueError(f"degree must be >= 0, got {q}")
    if q > MAX_DEGREE:
        raise ValueError(f"degree {q} exceeds the cap {MAX_DEGREE}")
    lam_frac = lam if isinstance(lam, Fraction) else Fraction(lam)
    if lam_frac < 0:
        raise ValueError(f"lam must be >= 0, got {lam}")
    exact = _coeffs_exact(lam_frac, q)
    return GegenCoeffTable(float(lam_frac), q, tuple(float(c) for c in exact))


@lru_cache(maxsize=None)
def _gegen_poly_exact(lam: Fraction, k: int) -> tuple:
    """C_k^lam as a dense vector of exact monomial coefficients, index =
    power of t."""
    vec = [Fraction(0)] * (k + 1)
    for j, c in enumerate(_coeffs_exact(lam, k)):
        vec[k - 2 * j] = (-1) ** j * c
    return tuple(vec)


@lru_cache(maxsize=None)
def _monomial_to_gegenbauer_exact(p: int, i: int) -> tuple:
    lam = Fraction(p - 2, 2)
    residual = [Fraction(0)] * (i + 1)
    residual[i] = Fraction(1)
    m = [Fraction(0)] * (i + 1)
    for k in range(i, -1, -1):
        poly = _gegen_poly_exact(lam, k)
        lead = poly[k]
        if residual[k] == 0:
            continue
        m[k] = residual[k] / lead
        for power in range(k + 1):
            residual[power] -= m[k] * poly[power]
    if any(residual):
        raise ArithmeticError("monomial reduction left a nonzero residual")
    return tuple(m)


def monomial_to_gegenbauer(p: int, i: int) -> np.ndarray:
    """Coefficients m_{k,i}, k = 0..i, expressing t^i in the basis of
    C_k^((p-2)/2) (Chebyshev for p = 2).

    Computed by exact rational back-substitution, so the parity zeros
    (m_{k,i} = 0 whenever k and i differ in parity) are exact.
    """
    if p < 2:
        raise ValueError(f"p must be >= 2, got {p}")
    if i < 0:
        raise ValueError(f"power must be >= 0, got {i}")
    if i > MAX_DEGREE:
        raise ValueError(f"power {i} exceeds the cap {MAX_DEGREE}")
    return np.array([float(c) for c in _monomial_to_gegenbauer_exact(p, i)])


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights integrating s |-> g(s) (1-s^2)^((p-3)/2) over
    (-1, 1) exactly for polynomials g up to degree 2*order - 1."""

    p: int
    order: int
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, g) -> float:
        values = g(self.nodes) if callable(g) else np.asarray(g, dtype=float)
        if values.shape != self.nodes.shape:
            raise ValueError("integrand values do not match the rule's nodes")
        return float(self.weights @ values)


@lru_cache(maxsize=None)
def gauss_jacobi_rule(p: int, order: int) -> QuadratureRule:
    """Gauss-Jacobi rule for the sphere's tangent weight, alpha = beta =
    (p-3)/2.  p = 2 yields the Chebyshev-Gauss rule."""
    if p < 2:
        raise ValueError(f"p must be >= 2, got {p}")
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    a = (p - 3) / 2.0
    nodes, weights = roots_jacobi(order, a, a)
    nodes = np.clip(nodes, -1.0, 1.0)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(p, order, nodes, weights)
