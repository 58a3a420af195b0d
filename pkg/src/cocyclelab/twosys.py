"""Two-transformation intersection experiments over the configuration space.

A seeded fair-bit configuration on Z^2 is rearranged by the lazy fiber
permutation built from the common first-visit indices of two polynomial
orbits; the per-time intersection probability is then an exact case
analysis with values in {0, 1/4, 1/2}, and the divergence averages along
the epoch marks are Monte Carlo only over the base trajectory.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import cocycle, polyrange
from .polyrange import EpochSchedule, IntPolynomial
from .streams import derive_seed, omega_bit, omega_bits_over_seeds

Cell = tuple[int, int]
ORIGIN: Cell = (0, 0)


@dataclass(frozen=True)
class OmegaConfig:
    """Seeded fair-bit array over Z^2 with O(1) deterministic reads."""

    omega_seed: int

    def bit(self, cell: Cell) -> int:
        return omega_bit(self.omega_seed, cell)


# --------------------------------------------------------------------------
# canonical enumeration of Z^2 minus a finite excluded set
# --------------------------------------------------------------------------
# Cells are ordered by L-infinity ring radius and lexicographically by
# (x, y) within a ring; (0, 0) is never enumerated.

def cell_rank(cell: Cell) -> int:
    """0-based position of a non-origin cell in the canonical order."""
    x, y = cell
    rho = max(abs(x), abs(y))
    if rho == 0:
        raise ValueError("origin is never enumerated")
    base = (2 * rho - 1) ** 2 - 1
    if x == -rho:
        pos = y + rho
    elif x < rho:
        pos = (2 * rho + 1) + 2 * (x + rho - 1) + (0 if y == -rho else 1)
    else:
        pos = (2 * rho + 1) + 2 * (2 * rho - 1) + (y + rho)
    return base + pos


def cell_unrank(r: int) -> Cell:
    """Inverse of cell_rank."""
    if r < 0:
        raise ValueError("rank must be nonnegative")
    rho = 1
    while (2 * rho + 1) ** 2 - 1 <= r:
        rho += 1
    pos = r - ((2 * rho - 1) ** 2 - 1)
    side = 2 * rho + 1
    if pos < side:
        return (-rho, pos - rho)
    pos -= side
    if pos < 2 * (2 * rho - 1):
        return (-rho + 1 + pos // 2, -rho if pos % 2 == 0 else rho)
    pos -= 2 * (2 * rho - 1)
    return (rho, pos - rho)


def complement_enumerate(excluded_ranks: Sequence[int], index: int) -> Cell:
    """index-th cell (1-based) of the canonical order skipping excluded cells.

    excluded_ranks must be sorted canonical ranks; lazy and unbounded in
    index.
    """
    if index < 1:
        raise ValueError("enumeration index starts at 1")
    r = index - 1
    while True:
        shifted = index - 1 + bisect_right(excluded_ranks, r)
        if shifted == r:
            return cell_unrank(r)
        r = shifted


def complement_rank(cell: Cell, excluded_ranks: Sequence[int]) -> int:
    """1-based position of a non-excluded cell in the skipped enumeration."""
    r = cell_rank(cell)
    i = bisect_left(excluded_ranks, r)
    if i < len(excluded_ranks) and excluded_ranks[i] == r:
        raise ValueError("cell is excluded from the enumeration")
    return r - i + 1


# --------------------------------------------------------------------------
# the fiber permutation view
# --------------------------------------------------------------------------

class HorizonError(ValueError):
    """A query requires orbit data past the materialized cap."""


@dataclass(frozen=True)
class PermutationView:
    """Truncated fiber permutation of Z^2 induced by two polynomial orbits.

    Key indices are the common first-visit times inside the epoch set, up
    to n_cap; the permutation maps the second orbit's key cells onto the
    first orbit's and transports the complements through the canonical
    enumeration.  All functionals computed downstream reference indices
    <= n_cap only, for which the truncated key set agrees with the
    untruncated one.
    """

    n_cap: int
    s1: np.ndarray                 # (n_cap + 1, 2); row n = S_{p1(n)}, row 0 = 0
    s2: np.ndarray
    keys: tuple[int, ...]          # key indices ascending
    s1_cells: tuple[Cell, ...]     # S_{p1(key_i)}
    s2_cells: tuple[Cell, ...]
    s1_index: dict                 # cell -> ordinal i (0-based)
    s2_index: dict
    e1_ranks: tuple[int, ...]      # sorted canonical ranks of s1_cells
    e2_ranks: tuple[int, ...]


def build_view(points1: np.ndarray, points2: np.ndarray,
               epochs: EpochSchedule, n_cap: int) -> PermutationView:
    """View from precomputed polynomial orbits (rows 1..n_cap, row per n)."""
    if len(points1) < n_cap or len(points2) < n_cap:
        raise HorizonError("orbit arrays shorter than n_cap")
    rec1 = polyrange.range_profile(points1[:n_cap])
    rec2 = polyrange.range_profile(points2[:n_cap])
    keys = polyrange.key_set(rec1, rec2, epochs, n_cap)
    s1 = np.vstack([np.zeros((1, 2), dtype=np.int64), points1[:n_cap]])
    s2 = np.vstack([np.zeros((1, 2), dtype=np.int64), points2[:n_cap]])
    c1 = tuple((int(s1[n, 0]), int(s1[n, 1])) for n in keys)
    c2 = tuple((int(s2[n, 0]), int(s2[n, 1])) for n in keys)
    return PermutationView(
        n_cap, s1, s2, keys, c1, c2,
        {c: i for i, c in enumerate(c1)},
        {c: i for i, c in enumerate(c2)},
        tuple(sorted(cell_rank(c) for c in c1)),
        tuple(sorted(cell_rank(c) for c in c2)),
    )


def view_from_trajectory(traj: cocycle.LayerTrajectory, p1: IntPolynomial,
                         p2: IntPolynomial, epochs: EpochSchedule,
                         n_cap: int) -> PermutationView:
    polyrange.validate_poly(p1, "deg2plus")
    polyrange.validate_poly(p2, "deg2plus")
    t1 = polyrange.polynomial_times(p1, n_cap)
    t2 = polyrange.polynomial_times(p2, n_cap)
    merged = sorted(set(t1) | set(t2))
    vals = cocycle.values_at_times(traj, merged)
    lookup = {t: vals[i] for i, t in enumerate(merged)}
    pts1 = np.array([lookup[t] for t in t1], dtype=np.int64)
    pts2 = np.array([lookup[t] for t in t2], dtype=np.int64)
    return build_view(pts1, pts2, epochs, n_cap)


def pi_apply(view: PermutationView, cell: Cell, direction: str = "forward") -> Cell:
    """The permutation (forward: second-orbit labels onto first-orbit)."""
    if direction == "forward":
        src_index, src_ranks = view.s2_index, view.e2_ranks
        dst_cells, dst_ranks = view.s1_cells, view.e1_ranks
    elif direction == "inverse":
        src_index, src_ranks = view.s1_index, view.e1_ranks
        dst_cells, dst_ranks = view.s2_cells, view.e2_ranks
    else:
        raise ValueError("direction must be forward or inverse")
    if cell == ORIGIN:
        return ORIGIN
    i = src_index.get(cell)
    if i is not None:
        return dst_cells[i]
    return complement_enumerate(dst_ranks, complement_rank(cell, src_ranks))


def psi_value(view: PermutationView, cfg: OmegaConfig, cell: Cell,
              direction: str = "forward") -> int:
    """Bit of the rearranged configuration at a cell.

    Forward: origin fixed, second-orbit key cells flipped through the
    permutation, all other cells passed through.  Inverse is the exact
    cellwise inverse.
    """
    if direction == "forward":
        if cell == ORIGIN:
            return cfg.bit(ORIGIN)
        i = view.s2_index.get(cell)
        if i is not None:
            return 1 - cfg.bit(view.s1_cells[i])
        return cfg.bit(pi_apply(view, cell, "forward"))
    if direction == "inverse":
        pre = pi_apply(view, cell, "inverse")
        flip = pre != ORIGIN and pre in view.s2_index
        return (1 - cfg.bit(pre)) if flip else cfg.bit(pre)
    raise ValueError("direction must be forward or inverse")


# --------------------------------------------------------------------------
# exact per-time intersection probabilities
# --------------------------------------------------------------------------

TAG_KEY_FLIP = "key_flip_hit"
TAG_INDEPENDENT = "independent_cells"
TAG_SAME_NOFLIP = "same_cell_noflip"
TAG_FLIP_COLLISION = "flip_collision"

_TAG_VALUE = {
    TAG_KEY_FLIP: Fraction(0),
    TAG_FLIP_COLLISION: Fraction(0),
    TAG_INDEPENDENT: Fraction(1, 4),
    TAG_SAME_NOFLIP: Fraction(1, 2),
}


@dataclass(frozen=True)
class PairProb:
    value: Fraction
    tag: str


def _resolve_second_cell(view: PermutationView, b: Cell) -> tuple[Cell, bool]:
    """Cell read by the rearranged configuration at b, and whether flipped."""
    if b == ORIGIN:
        return b, False
    i = view.s2_index.get(b)
    if i is not None:
        return view.s1_cells[i], True
    return pi_apply(view, b, "forward"), False


def _key_of_second_cell(view: PermutationView, b: Cell) -> int | None:
    i = view.s2_index.get(b)
    return view.keys[i] if i is not None else None


def pair_probability(view: PermutationView, n: int) -> PairProb:
    """Exact probability that both transported origin bits read zero at n.

    The second bit resolves to a target cell and a flip flag; a flip onto
    the first orbit's cell forces probability zero (directly for a key
    index, as a collision with another key's image otherwise), a non-flip
    coincidence gives 1/2, distinct cells give 1/4.
    """
    if not 0 <= n <= view.n_cap:
        raise HorizonError(f"index {n} beyond view cap {view.n_cap}")
    a = (int(view.s1[n, 0]), int(view.s1[n, 1]))
    b = (int(view.s2[n, 0]), int(view.s2[n, 1]))
    target, flipped = _resolve_second_cell(view, b)
    if target == a:
        if not flipped:
            return PairProb(_TAG_VALUE[TAG_SAME_NOFLIP], TAG_SAME_NOFLIP)
        tag = TAG_KEY_FLIP if _key_of_second_cell(view, b) == n else TAG_FLIP_COLLISION
        return PairProb(_TAG_VALUE[tag], tag)
    return PairProb(_TAG_VALUE[TAG_INDEPENDENT], TAG_INDEPENDENT)


def pair_probability_mc(view: PermutationView, n: int, omega_seeds: np.ndarray) -> float:
    """Empirical frequency of the joint zero-bit event over omega seeds."""
    a = (int(view.s1[n, 0]), int(view.s1[n, 1]))
    b = (int(view.s2[n, 0]), int(view.s2[n, 1]))
    target, flipped = _resolve_second_cell(view, b)
    bits_a = omega_bits_over_seeds(omega_seeds, a)
    bits_t = omega_bits_over_seeds(omega_seeds, target)
    second = 1 - bits_t if flipped else bits_t
    return float(np.mean((bits_a == 0) & (second == 0)))


@dataclass(frozen=True)
class DivergenceRow:
    k: int
    n_mark: int
    avg_at_n: float
    stderr_n: float
    m_mark: int
    avg_at_m: float
    stderr_m: float


@dataclass(frozen=True)
class DivergenceTable:
    rows: list[DivergenceRow]
    tag_counts: dict
    samples: int
    first_values: np.ndarray          # exact per-time values, first trajectory
    first_tags: tuple[str, ...]


def per_time_values(view: PermutationView) -> np.ndarray:
    """Exact pair probabilities for n = 0..n_cap-1 (float64, dyadic exact)."""
    vals = np.empty(view.n_cap, dtype=np.float64)
    for n in range(view.n_cap):
        vals[n] = float(pair_probability(view, n).value)
    return vals


def divergence_averages(p1: IntPolynomial, p2: IntPolynomial,
                        epochs: EpochSchedule, y_samples: int,
                        master_seed: int) -> DivergenceTable:
    """Cesaro averages of the exact pair probabilities at the epoch marks.

    Per-time values are exact; the Monte Carlo runs only over base
    trajectories (one derived seed each).
    """
    if y_samples < 1:
        raise ValueError("need at least one trajectory")
    n_cap = epochs.m_marks[-1]
    marks = sorted(set(epochs.n_marks) | set(epochs.m_marks))
    per_traj = {mk: [] for mk in marks}
    tag_counts: dict[str, int] = {}
    first_values = None
    first_tags: tuple[str, ...] = ()
    horizon = max(p1(n_cap), p2(n_cap))
    for s in range(y_samples):
        traj = cocycle.trajectory(derive_seed(master_seed, s), horizon, dim=2)
        view = view_from_trajectory(traj, p1, p2, epochs, n_cap)
        vals = np.empty(n_cap, dtype=np.float64)
        tags = []
        for n in range(n_cap):
            pp = pair_probability(view, n)
            vals[n] = float(pp.value)
            tags.append(pp.tag)
            tag_counts[pp.tag] = tag_counts.get(pp.tag, 0) + 1
        if first_values is None:
            first_values = vals.copy()
            first_tags = tuple(tags)
        csum = np.cumsum(vals)
        for mk in marks:
            per_traj[mk].append(csum[mk - 1] / mk)
    rows = []
    for k in range(epochs.depth):
        nm, mm = epochs.n_marks[k], epochs.m_marks[k]
        an = np.array(per_traj[nm])
        am = np.array(per_traj[mm])
        rows.append(DivergenceRow(
            k + 1, nm, float(an.mean()),
            float(an.std(ddof=1) / math.sqrt(y_samples)) if y_samples > 1 else 0.0,
            mm, float(am.mean()),
            float(am.std(ddof=1) / math.sqrt(y_samples)) if y_samples > 1 else 0.0))
    return DivergenceTable(rows, tag_counts, y_samples, first_values, first_tags)


# --------------------------------------------------------------------------
# recurrence counterexample: membership, certificate, triple probability
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MembershipResult:
    member: bool
    violation: tuple | None    # ("origin", n) or ("collision", j, n)


def _membership_from_points(points: np.ndarray) -> MembershipResult:
    seen: dict[Cell, int] = {}
    for idx, (x, y) in enumerate(points, start=1):
        cell = (int(x), int(y))
        if cell == ORIGIN:
            return MembershipResult(False, ("origin", idx))
        if cell in seen:
            return MembershipResult(False, ("collision", seen[cell], idx))
        seen[cell] = idx
    return MembershipResult(True, None)


def special_poly(l_coeff: int, d: int) -> IntPolynomial:
    if d < 3:
        raise ValueError("the recurrence construction needs degree >= 3")
    if l_coeff < 1:
        raise ValueError("the leading coefficient must be a positive integer")
    return IntPolynomial((0,) * d + (l_coeff,))


def cp_membership(traj: cocycle.LayerTrajectory, l_coeff: int, d: int,
                  horizon_n: int) -> MembershipResult:
    """Are S_{p(1)}..S_{p(horizon_n)} pairwise distinct and never the origin."""
    p = special_poly(l_coeff, d)
    pts = polyrange.polynomial_orbit(traj, p, horizon_n)
    return _membership_from_points(pts)


@dataclass(frozen=True)
class TripleResult:
    value: Fraction
    tag: str
    base_member: bool
    shift_member: bool


class _OrbitCache:
    """Base and shifted polynomial-orbit values from one combined evaluation."""

    def __init__(self, traj, l_coeff: int, d: int, horizon_n: int):
        self.p = special_poly(l_coeff, d)
        self.horizon_n = horizon_n
        base_times = [self.p(m) for m in range(1, horizon_n + 1)]
        combined = sorted({t1 + t2 for t1 in [0] + base_times for t2 in base_times})
        vals = cocycle.values_at_times(traj, combined)
        self._lookup = {t: vals[i] for i, t in enumerate(combined)}
        self.base_points = np.array([self._lookup[t] for t in base_times],
                                    dtype=np.int64)
        self.base = _membership_from_points(self.base_points)

    def shifted_membership(self, n: int) -> MembershipResult:
        shift = self.p(n)
        pts = np.array([self._lookup[shift + self.p(m)] - self._lookup[shift]
                        for m in range(1, self.horizon_n + 1)], dtype=np.int64)
        return _membership_from_points(pts)


def triple_probability(traj: cocycle.LayerTrajectory, l_coeff: int, d: int,
                       n: int, horizon_n: int,
                       cache: _OrbitCache | None = None) -> TripleResult:
    """Exact probability of the three-bit intersection event at time p(n).

    The event reads the configuration at the origin, at a = S_{p(n)}, and
    at the involution-transported origin of the second system; when both
    membership checks pass the transported bit is the flip of the a-bit and
    the probability is exactly zero.
    """
    if not 1 <= n <= horizon_n:
        raise HorizonError(f"n must lie in 1..{horizon_n}")
    if cache is None:
        cache = _OrbitCache(traj, l_coeff, d, horizon_n)
    base = cache.base
    shifted = cache.shifted_membership(n)
    a = (int(cache.base_points[n - 1, 0]), int(cache.base_points[n - 1, 1]))
    if base.member:
        # involution flips every orbit cell of the base point; a is one
        return TripleResult(Fraction(0), TAG_KEY_FLIP, True, shifted.member)
    if a == ORIGIN:
        return TripleResult(Fraction(1, 2), TAG_SAME_NOFLIP, False, shifted.member)
    return TripleResult(Fraction(1, 4), TAG_INDEPENDENT, False, shifted.member)


def triple_probability_mc(traj, l_coeff: int, d: int, n: int, horizon_n: int,
                          omega_seeds: np.ndarray,
                          cache: _OrbitCache | None = None) -> float:
    """Empirical frequency of the three-bit event over omega seeds."""
    if cache is None:
        cache = _OrbitCache(traj, l_coeff, d, horizon_n)
    a = (int(cache.base_points[n - 1, 0]), int(cache.base_points[n - 1, 1]))
    flip_set = {(int(x), int(y)) for x, y in cache.base_points} \
        if cache.base.member else set()
    bits_origin = omega_bits_over_seeds(omega_seeds, ORIGIN)
    bits_a = omega_bits_over_seeds(omega_seeds, a)
    s_bit = (1 - bits_a) if a in flip_set else bits_a
    return float(np.mean((bits_origin == 0) & (bits_a == 0) & (s_bit == 0)))


@dataclass(frozen=True)
class CertificateReport:
    beta: float
    horizon: int
    samples: int
    empirical: float
    sampling_error: float     # 95% normal-approximation half-width
    tail_bound: float
    lower_bound: float


def _collision_tail(l_coeff: int, d: int, horizon: int) -> float:
    """Bound on sum over pairs with an index beyond the horizon of
    1/(L(m^2+t^3)), via exact inner sums up to a cap and the integral
    majorant g(m) <= (2 pi / 3 sqrt 3) m^(-4/3) beyond it."""
    const = 2.0 * math.pi / (3.0 * math.sqrt(3.0))
    m_cap = horizon + 1500
    total = 0.0
    t = np.arange(1.0, 20_000.0)
    t3 = t ** 3
    for m in range(horizon + 1, m_cap + 1):
        total += float(np.sum(1.0 / (m * m + t3))) + 0.5 / t[-1] ** 2
    total += const * (3.0 * m_cap ** (-1.0 / 3.0) + m_cap ** (-4.0 / 3.0))
    return total / l_coeff


def _origin_tail(l_coeff: int, d: int, horizon: int) -> float:
    cap = horizon + 2000
    total = sum(1.0 / n ** d for n in range(horizon + 1, cap))
    total += float(cap) ** (1 - d) / (d - 1) + 1.0 / cap ** d
    return total / l_coeff


def measure_beta(ns: Sequence[int] = (16, 32, 64, 128, 256, 512, 1024),
                 tol_l2sq: float = 0.01) -> float:
    """max over the grid of n * sup_x P(S_n = x), defect-inflated (2-D)."""
    best = 0.0
    for n in ns:
        dist, _ = cocycle.exact_dist_S(n, dim=2, tol_l2sq=tol_l2sq)
        comp = dist.components[0]
        sup1 = float(comp.mass.max()) + comp.defect
        best = max(best, n * sup1 * sup1)
    return best


def cp_certificate(l_coeff: int, d: int, horizon_n: int, samples: int,
                   master_seed: int, beta: float | None = None) -> CertificateReport:
    """Certified lower bound on the measure of the good base set."""
    if beta is None:
        beta = measure_beta()
    p = special_poly(l_coeff, d)
    horizon = p(horizon_n)
    hits = 0
    for s in range(samples):
        traj = cocycle.trajectory(derive_seed(master_seed, s), horizon, dim=2)
        if cp_membership(traj, l_coeff, d, horizon_n).member:
            hits += 1
    emp = hits / samples
    err = 1.96 * math.sqrt(max(emp * (1 - emp), 1.0 / samples) / samples)
    tail = beta * (_collision_tail(l_coeff, d, horizon_n)
                   + _origin_tail(l_coeff, d, horizon_n))
    return CertificateReport(beta, horizon_n, samples, emp, err, tail,
                             emp - err - tail)


# --------------------------------------------------------------------------
# measure preservation of the conjugation
# --------------------------------------------------------------------------

def cylinder_frequency(view: PermutationView, cells: Sequence[Cell],
                       pattern: Sequence[int], omega_seeds: np.ndarray) -> float:
    """Frequency of {rearranged configuration matches pattern on cells}."""
    match = np.ones(len(omega_seeds), dtype=bool)
    for cell, want in zip(cells, pattern):
        target, flipped = _resolve_second_cell(view, cell)
        bits = omega_bits_over_seeds(omega_seeds, target)
        if flipped:
            bits = 1 - bits
        match &= bits == want
    return float(np.mean(match))
