"""Local-CLT verification experiments over the exact and sampled laws.

Gap curves against the fixed gaussian with sigma^2 = 2 (ln 2)^2, the
characteristic-function regime fits, the junk-term variance bound, the
perturbation-transfer harness, and the small-ball table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import cocycle, lattice, schedule

SIGMA_SQ = 2.0 * math.log(2.0) ** 2  # fixed variance constant of the construction


@dataclass(frozen=True)
class DiscrepancyRow:
    n: int
    gap: float
    defect_bound: float
    variance_ratio: float
    source: str


def _empirical_component(samples: np.ndarray) -> lattice.LatticeDist:
    lo, hi = int(samples.min()), int(samples.max())
    counts = np.bincount(samples - lo, minlength=hi - lo + 1)
    return lattice.make_dist(lo, counts / len(samples))


def discrepancy_curve(ns: Sequence[int], source: str, dim: int = 1,
                      mc_samples: int = 10_000, seed: int = 1,
                      tol_l2sq: float = 0.01) -> list[DiscrepancyRow]:
    """Gap rows for the chosen law family at each n (ascending)."""
    if not ns or list(ns) != sorted(ns):
        raise ValueError("ns must be nonempty ascending")
    rows = []
    for n in ns:
        if source == "u-exact":
            dist = cocycle.exact_dist_U(n, dim=dim)
        elif source == "s-exact":
            dist, _ = cocycle.exact_dist_S(n, dim=dim, tol_l2sq=tol_l2sq)
        elif source == "s-montecarlo":
            if mc_samples < 10_000:
                raise ValueError("monte carlo source needs >= 10^4 samples")
            k_top, _ = schedule.truncation_level(max(n, 2), tol_l2sq)
            samp = cocycle.sample_S(seed, n, mc_samples, k_max=k_top)
            dist = lattice.ProductDist(tuple(
                _empirical_component(samp[:, i]) for i in range(dim)))
        else:
            raise ValueError(f"unknown source {source!r}")
        g = lattice.sup_lclt_gap(dist, n, SIGMA_SQ)
        var = lattice.moments(dist.components[0])[1]
        rows.append(DiscrepancyRow(n, g.gap, g.defect_term,
                                   var / (n * SIGMA_SQ), source))
    return rows


def ascending_runs(values: Sequence[float]) -> int:
    """Number of maximal ascending runs of adjacent pairs; 0 if monotone."""
    runs = 0
    rising = False
    for a, b in zip(values, values[1:]):
        if b > a:
            if not rising:
                runs += 1
            rising = True
        else:
            rising = False
    return runs


@dataclass(frozen=True)
class CharfnResult:
    n: int
    applicable: bool
    l_fit: float
    c_fit: float
    passed: bool


GRID_POINTS = 512  # per characteristic-function regime


def charfn_regime_check(n: int) -> CharfnResult:
    """Fit the gaussian-regime and tail-regime decay constants of psi_n.

    l_fit = min over 0 < |x| <= n^(1/4) of -log(|psi_n(x/sqrt n)| / 2) / x^2;
    c_fit analogous over n^(1/4) <= x <= pi sqrt(n) with the n^(1/4)
    normalization.  Degenerate laws (empty paired index set) are marked
    inapplicable.
    """
    if n < 16:
        raise ValueError("charfn_regime_check needs n >= 16")
    dist = cocycle.exact_dist_U(n, dim=1)
    comp = dist.components[0]
    if len(comp.mass) == 1:
        return CharfnResult(n, False, math.nan, math.nan, False)
    sqrt_n = math.sqrt(n)
    x_small = np.linspace(0.0, n ** 0.25, GRID_POINTS + 1)[1:]
    psi = np.abs(lattice.char_fn_grid(comp, x_small / sqrt_n))
    l_fit = float(np.min(-np.log(psi / 2.0) / x_small ** 2))
    x_large = np.linspace(n ** 0.25, math.pi * sqrt_n, GRID_POINTS)
    psi = np.abs(lattice.char_fn_grid(comp, x_large / sqrt_n))
    c_fit = float(np.min(-np.log(psi / 2.0) / n ** 0.25))
    return CharfnResult(n, True, l_fit, c_fit, l_fit > 0 and c_fit > 0)


def junk_variance_check(n: int) -> tuple[float, float, bool]:
    """Exact variance of the boundary correction term against 8/log2(n).

    Nonzero only when log2(n-1) is a positive even integer, where the
    correction is a sum of two independent coboundary pairs with weights
    n-1 and n.
    """
    if n < 3:
        raise ValueError("junk_variance_check needs n >= 3")
    k = (n - 1).bit_length() - 1
    var_exact = 0.0
    if n - 1 == (1 << k) and k >= 2 and k % 2 == 0:
        var_exact = (2.0 * (n - 1) ** 2 * float(schedule.alpha_sq(k))
                     + 2.0 * n ** 2 * float(schedule.alpha_sq(k + 1)))
    bound = 8.0 / math.log2(n)
    return var_exact, bound, var_exact <= bound


@dataclass(frozen=True)
class TransferRow:
    n: int
    gap_y: float
    gap_x: float
    z_variance: float
    certificate_ok: bool


@dataclass(frozen=True)
class TransferReport:
    rows: list[TransferRow]
    passed: bool            # gap difference shrinks from first to last n
    certificate_ok: bool


def transfer_check(y_family: Callable[[int], lattice.LatticeDist],
                   z_family: Callable[[int], lattice.LatticeDist],
                   ns: Sequence[int], cert_c: float = 4.0) -> TransferReport:
    """Gap transfer under an independent perturbation X = Y + Z.

    z_family must satisfy the variance certificate E Z^2 <= c*n/sqrt(log2 n);
    a violation is flagged but the comparison still runs.
    """
    rows = []
    for n in ns:
        y = y_family(n)
        z = z_family(n)
        zvar = lattice.moments(z)[1]
        ok = zvar <= cert_c * n / math.sqrt(math.log2(max(n, 2)))
        x = lattice.convolve(y, z)
        gy = lattice.sup_lclt_gap(lattice.ProductDist((y,)), n, SIGMA_SQ).gap
        gx = lattice.sup_lclt_gap(lattice.ProductDist((x,)), n, SIGMA_SQ).gap
        rows.append(TransferRow(n, gy, gx, zvar, ok))
    # the gaps converge together: the separation shrinks along the grid
    diffs = [abs(r.gap_x - r.gap_y) for r in rows]
    return TransferReport(rows, diffs[-1] < diffs[0], all(r.certificate_ok for r in rows))


@dataclass(frozen=True)
class SmallBallRow:
    n: int
    value: float       # n * P(||S_n||_inf <= r)
    bound: float       # (2r+2)^2 / (2 pi sigma^2)
    margin: float      # value / bound - 1


def small_ball_check(ns: Sequence[int], radius: int = 0,
                     tol_l2sq: float = 0.01) -> list[SmallBallRow]:
    """n * P(||S_n||_inf <= r) for the 2-D law against the covering bound."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    bound = (2.0 * radius + 2.0) ** 2 / (2.0 * math.pi * SIGMA_SQ)
    rows = []
    for n in ns:
        dist, _ = cocycle.exact_dist_S(n, dim=2, tol_l2sq=tol_l2sq)
        comp = dist.components[0]
        ball = sum(comp.prob(x) for x in range(-radius, radius + 1))
        value = n * ball * ball
        rows.append(SmallBallRow(n, value, bound, value / bound - 1.0))
    return rows
