"""Deterministic parameter family p_k, d_k, alpha_k and index bookkeeping.

The schedule is fixed: p_k = 2^k for even k and 2^k + 1 for odd k,
d_k = 2^(k^2), alpha_1^2 = 1/4 and alpha_k^2 = 1/(p_k^2 * k * log2(k)) for
k >= 2 (logs are base 2 throughout).  Everything here is a pure function of
its arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

K_GUARD = 64  # d_k = 2^(k*k) stays meaningful; callers never need more


class ParameterRangeError(ValueError):
    pass


def p_value(k: int) -> int:
    if k < 1:
        raise ParameterRangeError(f"layer index must be >= 1, got {k}")
    return (1 << k) if k % 2 == 0 else (1 << k) + 1


def d_value(k: int) -> int:
    if k < 1:
        raise ParameterRangeError(f"layer index must be >= 1, got {k}")
    if k > K_GUARD:
        raise ParameterRangeError(f"layer index {k} beyond overflow guard {K_GUARD}")
    return 1 << (k * k)


def alpha_sq(k: int) -> Fraction | float:
    """alpha_k^2, exact Fraction whenever log2(k) is an integer."""
    if k < 1:
        raise ParameterRangeError(f"layer index must be >= 1, got {k}")
    if k == 1:
        return Fraction(1, 4)
    m = k.bit_length() - 1
    if k == (1 << m):
        return Fraction(1, p_value(k) ** 2 * k * m)
    return 1.0 / (p_value(k) ** 2 * k * math.log2(k))


def params(k: int) -> tuple[int, int, Fraction | float]:
    """(p_k, d_k, alpha_k^2) with range guards."""
    return p_value(k), d_value(k), alpha_sq(k)


@dataclass(frozen=True)
class IndexSets:
    """Regime classification of layers 1..k_max at time n.

    ``small``/``medium``/``large_truncated`` partition {1..k_max}; boundary
    layers (p_k = n or d_k = n) go to large when n <= p_k, else to small,
    so medium keeps the strict inequalities p_k < n < d_k.
    """

    n: int
    k_max: int
    small: frozenset[int]
    medium: frozenset[int]
    large_truncated: frozenset[int]
    i_full: frozenset[int]   # even k with p_k < n < d_k
    i_hat: frozenset[int]    # even k with p_{k+1} < n < d_k


def index_sets(n: int, k_max: int) -> IndexSets:
    if n < 2:
        raise ParameterRangeError(f"index sets need n >= 2, got {n}")
    if k_max < 1:
        raise ParameterRangeError(f"k_max must be >= 1, got {k_max}")
    small, medium, large = set(), set(), set()
    i_full, i_hat = set(), set()
    for k in range(1, k_max + 1):
        p, d = p_value(k), d_value(k)
        if n <= p:
            large.add(k)
        elif d <= n:
            small.add(k)
        else:
            medium.add(k)
            if k % 2 == 0:
                i_full.add(k)
                if p_value(k + 1) < n:
                    i_hat.add(k)
    return IndexSets(n, k_max, frozenset(small), frozenset(medium),
                     frozenset(large), frozenset(i_full), frozenset(i_hat))


def trapezoid_weight(j: int, n: int, k: int) -> int:
    """Weight of orbit site j in the length-p_k window sum over n starts."""
    if n < 1 or k < 1:
        raise ParameterRangeError("trapezoid_weight needs n >= 1, k >= 1")
    p = p_value(k)
    return max(0, min(j, n - 1) - max(0, j - p + 1) + 1)


def net_weight_profile(n: int, k: int) -> list[tuple[int, int, int]]:
    """Net weights c_j = w_j(n,k) - w_{j-d_k}(n,k), run-length encoded.

    Returns (start, length, value) runs with strictly increasing starts and
    implicit zeros elsewhere; the values sum to zero (the mirror trapezoid
    cancels the positive one).  Starts are python ints since d_k can exceed
    2^63.
    """
    if n < 1 or k < 1:
        raise ParameterRangeError("net_weight_profile needs n >= 1, k >= 1")
    p, d = p_value(k), d_value(k)
    width = n + p - 1  # positive support [0, width)
    if d >= width:
        runs = _trapezoid_runs(n, p)
        return runs + [(d + s, ln, -v) for s, ln, v in runs]
    # overlapping trapezoids: materialize the short dense profile
    w = [trapezoid_weight(j, n, k) for j in range(width)]
    c = [0] * (width + d)
    for j, v in enumerate(w):
        c[j] += v
        c[j + d] -= v
    runs: list[tuple[int, int, int]] = []
    j = 0
    while j < len(c):
        if c[j] == 0:
            j += 1
            continue
        j2 = j
        while j2 + 1 < len(c) and c[j2 + 1] == c[j]:
            j2 += 1
        runs.append((j, j2 - j + 1, c[j]))
        j = j2 + 1
    return runs


def _trapezoid_runs(n: int, p: int) -> list[tuple[int, int, int]]:
    m, top = min(n, p), max(n, p)
    runs = [(j, 1, j + 1) for j in range(m - 1)]
    runs.append((m - 1, top - m + 1, m))
    runs.extend((top + i, 1, m - 1 - i) for i in range(m - 1))
    return runs


def residual_bound_formula(t: int, k: int) -> float:
    """Certified bound on sum_{l>k} ||S_t(f_l)||_2^2 per component.

    Crude per-term majorant 4t^2/(p_l * l * log2 l) for p_l >= t, summed by
    a geometric majorant; the K=1 corner uses log2(max(k,2)) to stay finite.
    """
    kk = max(k, 2)
    return 8.0 * t * t / (2.0 ** k * k * math.log2(kk))


def truncation_level(t: int, tol_l2sq: float) -> tuple[int, float]:
    """Smallest K >= ceil(log2 t) whose dropped-layer L2 bound meets tol."""
    if t < 2:
        raise ParameterRangeError(f"truncation_level needs t >= 2, got {t}")
    if tol_l2sq <= 0:
        raise ParameterRangeError("tolerance must be positive")
    k = max(1, math.ceil(math.log2(t)))
    while True:
        bound = residual_bound_formula(t, k)
        if bound <= tol_l2sq:
            return k, bound
        k += 1
        if k > K_GUARD:
            raise ParameterRangeError(
                f"tolerance {tol_l2sq} unreachable within layer guard {K_GUARD}")
