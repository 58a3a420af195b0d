"""Range statistics of the cocycle sampled at polynomial times.

First-visit bookkeeping over exact lattice points, the epoch schedule with
its diverging length ratios, and the exhaustive integer growth claims that
feed the collision bounds.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import cocycle
from .streams import derive_seed

VALUE_GUARD = 1 << 127


class PolynomialError(ValueError):
    pass


class OverflowGuardError(OverflowError):
    pass


@dataclass(frozen=True)
class IntPolynomial:
    """Integer polynomial, constant coefficient first."""

    coeffs: tuple[int, ...]

    def __post_init__(self):
        if not self.coeffs or all(c == 0 for c in self.coeffs):
            raise PolynomialError("polynomial must have a nonzero coefficient")
        if self.coeffs[-1] == 0:
            raise PolynomialError("leading coefficient must be nonzero (trim zeros)")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> int:
        return self.coeffs[-1]

    def __call__(self, n: int) -> int:
        v = 0
        for c in reversed(self.coeffs):
            v = v * n + c
        if abs(v) >= VALUE_GUARD:
            raise OverflowGuardError(f"polynomial value at {n} beyond 128-bit guard")
        return v

    def __str__(self) -> str:
        parts = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if i == 0:
                parts.append(str(c))
            elif i == 1:
                parts.append("n" if c == 1 else f"{c}*n")
            else:
                parts.append(f"n^{i}" if c == 1 else f"{c}*n^{i}")
        return "+".join(parts).replace("+-", "-")


_TERM_RE = re.compile(
    r"^(?P<sign>[+-])?(?P<coef>\d+)?(?:\*?(?P<var>n)(?:\^(?P<exp>\d+))?)?$")


def parse_polynomial(text: str) -> IntPolynomial:
    """Parse 'c0+c1*n+...' / 'n^2' / '100*n^3' into an IntPolynomial."""
    s = text.replace(" ", "").replace("-", "+-")
    terms = [t for t in s.split("+") if t]
    coeffs: dict[int, int] = {}
    for t in terms:
        m = _TERM_RE.match(t)
        if not m or (m.group("coef") is None and m.group("var") is None):
            raise PolynomialError(f"cannot parse polynomial term {t!r} in {text!r}")
        coef = int(m.group("coef")) if m.group("coef") is not None else 1
        if m.group("sign") == "-":
            coef = -coef
        if m.group("var") is None:
            exp = 0
        else:
            exp = int(m.group("exp")) if m.group("exp") else 1
        coeffs[exp] = coeffs.get(exp, 0) + coef
    deg = max(coeffs)
    return IntPolynomial(tuple(coeffs.get(i, 0) for i in range(deg + 1)))


def validate_poly(p: IntPolynomial, context: str = "deg2plus") -> None:
    """Enforce the degree/positivity rules of the consuming experiment."""
    if context == "any":
        return
    if context != "deg2plus":
        raise ValueError(f"unknown validation context {context!r}")
    if p.degree < 2:
        raise PolynomialError(f"degree {p.degree} < 2 for {p}")
    if p.leading <= 0:
        raise PolynomialError(
            f"leading coefficient {p.leading} <= 0 for {p}; "
            "handle negative-leading polynomials through inverse maps")


def polynomial_times(p: IntPolynomial, count: int) -> list[int]:
    """p(1..count), checked strictly increasing and >= 1."""
    times = [p(k) for k in range(1, count + 1)]
    for a, b in zip(times, times[1:]):
        if b <= a:
            raise PolynomialError(f"{p} is not strictly increasing on 1..{count}")
    if times and times[0] < 1:
        raise PolynomialError(f"{p} must be >= 1 on n >= 1")
    return times


# --------------------------------------------------------------------------
# epoch schedule
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class EpochSchedule:
    """Intervals (N_k, M_k] with strictly growing length ratios."""

    n_marks: tuple[int, ...]
    m_marks: tuple[int, ...]

    def __post_init__(self):
        prev_m = 0
        for n, m in zip(self.n_marks, self.m_marks):
            if not prev_m <= n < m:
                raise ValueError("epochs must satisfy M_{k-1} <= N_k < M_k")
            prev_m = m

    @property
    def depth(self) -> int:
        return len(self.n_marks)

    def contains(self, n: int) -> bool:
        for lo, hi in zip(self.n_marks, self.m_marks):
            if lo < n <= hi:
                return True
        return False

    def count_upto(self, x: int) -> int:
        """|J intersect [0, x]| computed from the interval arithmetic."""
        total = 0
        for lo, hi in zip(self.n_marks, self.m_marks):
            total += max(0, min(hi, x) - lo) if x > lo else 0
        return total


def build_epochs(c1: int, c2: int, depth: int, n1: int = 32) -> EpochSchedule:
    """N_1 = n1, M_k = k*c1*N_k, N_{k+1} = k*c2*M_k; ratios grow linearly."""
    if c1 < 2 or c2 < 2:
        raise ValueError("epoch factors must be >= 2")
    if depth < 1 or depth > 24:
        raise OverflowGuardError("epoch depth outside 1..24")
    ns, ms = [], []
    n = n1
    for k in range(1, depth + 1):
        m = k * c1 * n
        ns.append(n)
        ms.append(m)
        n = k * c2 * m
    return EpochSchedule(tuple(ns), tuple(ms))


# --------------------------------------------------------------------------
# range records
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RangeRecord:
    """First-visit statistics of a walk sampled at indices 1..N."""

    sizes: np.ndarray          # |R_n| for n = 1..N
    key_set: tuple[int, ...]   # first-visit indices with nonzero value
    first_visit: dict          # lattice point -> first index

    @property
    def horizon(self) -> int:
        return len(self.sizes)


def range_profile(points: np.ndarray) -> RangeRecord:
    """Distinct-value and first-visit semantics over (N, 2) lattice points."""
    pts = np.asarray(points)
    sizes = np.empty(len(pts), dtype=np.int64)
    first: dict[tuple[int, int], int] = {}
    keys = []
    for idx, (x, y) in enumerate(pts, start=1):
        cell = (int(x), int(y))
        if cell not in first:
            first[cell] = idx
            if cell != (0, 0):
                keys.append(idx)
        sizes[idx - 1] = len(first)
    return RangeRecord(sizes, tuple(keys), first)


def full_range_profile(traj: cocycle.LayerTrajectory, n_cap: int) -> np.ndarray:
    """|A_N| for N = 1..n_cap over the full orbit (S_0, ..., S_{N-1})."""
    pts = cocycle.values_at_times(traj, np.arange(n_cap, dtype=np.int64))
    sizes = np.empty(n_cap, dtype=np.int64)
    seen = set()
    for idx in range(n_cap):
        seen.add((int(pts[idx, 0]), int(pts[idx, 1])))
        sizes[idx] = len(seen)
    return sizes


def polynomial_orbit(traj: cocycle.LayerTrajectory, p: IntPolynomial,
                     count: int) -> np.ndarray:
    """S_{p(k)}(F) for k = 1..count; (count, 2) int64."""
    times = polynomial_times(p, count)
    return cocycle.values_at_times(traj, times)


@dataclass(frozen=True)
class RangeMomentsRow:
    n: int
    mean_ratio: float      # mean |R_n| / n
    stderr_mean: float
    var_scaled: float      # var |R_n| / n^(3/2)
    k_hat: float           # (1 - mean_ratio) * sqrt(n)
    samples: int


def range_moments_mc(p: IntPolynomial, n_grid: Sequence[int], samples: int,
                     master_seed: int, dim: int = 2) -> list[RangeMomentsRow]:
    """Monte Carlo range moments over independent trajectories."""
    if samples < 30:
        raise ValueError("range moments need >= 30 samples")
    validate_poly(p, "deg2plus")
    n_max = max(n_grid)
    horizon = p(n_max)
    sizes = np.empty((samples, len(n_grid)), dtype=np.int64)
    for s in range(samples):
        traj = cocycle.trajectory(derive_seed(master_seed, s), horizon, dim=dim)
        rec = range_profile(polynomial_orbit(traj, p, n_max))
        sizes[s] = [rec.sizes[n - 1] for n in n_grid]
    rows = []
    for j, n in enumerate(n_grid):
        ratios = sizes[:, j] / n
        mean = float(ratios.mean())
        se = float(ratios.std(ddof=1) / math.sqrt(samples))
        var_scaled = float(sizes[:, j].var(ddof=1) / n ** 1.5)
        rows.append(RangeMomentsRow(n, mean, se, var_scaled,
                                    (1.0 - mean) * math.sqrt(n), samples))
    return rows


# --------------------------------------------------------------------------
# growth claims (exhaustive integer checks)
# --------------------------------------------------------------------------

def growth_claims_check(p: IntPolynomial, n_max: int) -> tuple[float, bool]:
    """min over 1 <= k < n <= n_max of (p(n)-p(k)) / (n + (n-k)^2)."""
    validate_poly(p, "deg2plus")
    gamma = math.inf
    for n in range(2, n_max + 1):
        pn = p(n)
        for k in range(1, n):
            gamma = min(gamma, (pn - p(k)) / (n + (n - k) ** 2))
    return gamma, gamma > 0


def claim2_check(d: int, n_max: int) -> bool:
    """n^d - k^d >= n^2 + (n-k)^3 for all 1 <= k < n <= n_max (d >= 3)."""
    if d < 3:
        raise ValueError("claim needs degree >= 3")
    for n in range(2, n_max + 1):
        nd = n ** d
        for k in range(1, n):
            if nd - k ** d < n * n + (n - k) ** 3:
                return False
    return True


def key_set(rec1: RangeRecord, rec2: RangeRecord, epochs: EpochSchedule,
            n_cap: int) -> tuple[int, ...]:
    """First-visit indices common to both walks, restricted to the epochs."""
    if n_cap > min(rec1.horizon, rec2.horizon):
        raise ValueError("n_cap beyond a record horizon")
    k2 = set(rec2.key_set)
    return tuple(n for n in rec1.key_set
                 if n <= n_cap and n in k2 and epochs.contains(n))
