"""The layer-built cocycle: trajectories, decomposition, exact laws.

A trajectory is a seeded realization of all ternary layer variables along
one orbit; every layer variable at every site is an independent instance
of the marginal law (the fully independent product base), which satisfies
every independence property the decomposition arguments use.  Trajectories
are truncated at K_max >= ceil(log2 horizon), so every medium-regime layer
of any reachable time is present; the certified L2 bound on the dropped
large-regime layers is carried on the trajectory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import engine, lattice, schedule, streams
from .schedule import d_value, p_value, alpha_sq, index_sets


class HorizonError(ValueError):
    """A read past the trajectory horizon or truncation level."""


DECOMPOSE_GUARD = 1 << 21  # decompose materializes windows of ~K*n sites


@dataclass(frozen=True)
class LayerTrajectory:
    seed: int
    dim: int
    horizon: int
    k_max: int
    residual_bound: float
    origin: int = 0  # orbit shift: site j reads absolute position origin + j

    def shifted(self, m: int) -> "LayerTrajectory":
        if m < 0 or m > self.horizon:
            raise HorizonError(f"shift {m} outside horizon {self.horizon}")
        return LayerTrajectory(self.seed, self.dim, self.horizon - m,
                               self.k_max, self.residual_bound, self.origin + m)


def trajectory(seed: int, horizon: int, dim: int = 2, k_pad: int = 0) -> LayerTrajectory:
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if horizon >= 1 << 55:
        raise HorizonError(f"horizon {horizon} beyond supported range")
    k_max = max(3, math.ceil(math.log2(max(horizon, 2)))) + k_pad
    residual = schedule.residual_bound_formula(horizon, k_max)
    return LayerTrajectory(seed, dim, horizon, k_max, residual)


def layer_value(traj: LayerTrajectory, k: int, i: int, j: int) -> int:
    """Ternary value of layer k, component i, at orbit site j."""
    if not 1 <= k <= traj.k_max:
        raise HorizonError(f"layer {k} beyond truncation level {traj.k_max}")
    if not 1 <= i <= traj.dim:
        raise ValueError(f"component {i} outside 1..{traj.dim}")
    if j < 0:
        raise ValueError("site index must be nonnegative")
    return streams.layer_site_value(traj.seed, k, i, traj.origin + j, d_value(k))


def _layer_values_abs(traj, k, i, abs_lo, abs_hi) -> np.ndarray:
    """int8 values at absolute positions [abs_lo, abs_hi), window-split."""
    d = d_value(k)
    n = abs_hi - abs_lo
    if abs_hi <= d:
        return streams.layer_block(traj.seed, k, i, 0, abs_lo, n)
    if abs_lo >= d:
        return streams.layer_block(traj.seed, k, i, 1, abs_lo - d, n)
    left = streams.layer_block(traj.seed, k, i, 0, abs_lo, d - abs_lo)
    right = streams.layer_block(traj.seed, k, i, 1, 0, abs_hi - d)
    return np.concatenate([left, right])


def _check_times(traj: LayerTrajectory, times) -> np.ndarray:
    qs = np.asarray(times, dtype=np.int64)
    if len(qs) and int(qs.max()) > traj.horizon:
        raise HorizonError(
            f"time {int(qs.max())} beyond trajectory horizon {traj.horizon}")
    return qs


def values_at_times(traj: LayerTrajectory, times) -> np.ndarray:
    """S_n(F) at sorted times; (len(times), dim) int64."""
    qs = _check_times(traj, times)
    if traj.origin != 0:
        base = LayerTrajectory(traj.seed, traj.dim, traj.origin + traj.horizon,
                               traj.k_max, traj.residual_bound)
        both = values_at_times(base, np.concatenate(([traj.origin],
                                                     qs + traj.origin)))
        return both[1:] - both[0]
    if traj.dim > 2:
        raise NotImplementedError("batched evaluation supports dim <= 2")
    vals, _ = engine.eval_times(traj.seed, traj.k_max, qs)
    return vals[:, :traj.dim]


def cocycle_at(traj: LayerTrajectory, n: int) -> np.ndarray:
    """S_n(F) for one time (zero vector at n = 0)."""
    if n < 0 or n > traj.horizon:
        raise HorizonError(f"time {n} outside [0, {traj.horizon}]")
    if n == 0:
        return np.zeros(traj.dim, dtype=np.int64)
    return values_at_times(traj, [n])[0]


# --------------------------------------------------------------------------
# decomposition
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DecompositionReport:
    """All partial sums of S_n(F) at one (trajectory, n), componentwise.

    s_n = z_sm + y_hat + z_la, y_hat = w + z_script and w = u + e hold as
    integer identities; u + v_extra is the wider even-index paired sum, and
    e_display re-derives e from its explicit boundary-term expression.
    """

    n: int
    s_n: np.ndarray
    z_sm: np.ndarray
    y_hat: np.ndarray
    z_la: np.ndarray
    w: np.ndarray
    u: np.ndarray
    e: np.ndarray
    z_script: np.ndarray
    v_extra: np.ndarray
    e_display: np.ndarray
    u_full: np.ndarray  # the I_n-indexed paired sum (u + v_extra target)


def decompose(traj: LayerTrajectory, n: int) -> DecompositionReport:
    if not 2 <= n <= traj.horizon:
        raise HorizonError(f"decompose needs 2 <= n <= horizon, got {n}")
    k_top = traj.k_max
    width_total = sum(n + p_value(k) for k in range(1, k_top + 1))
    if width_total > DECOMPOSE_GUARD:
        raise HorizonError(f"decompose window {width_total} beyond guard")
    D = traj.dim
    sets = index_sets(n, k_top)
    z_sm = np.zeros(D, dtype=np.int64)
    y_hat = np.zeros(D, dtype=np.int64)
    z_la = np.zeros(D, dtype=np.int64)
    w_vec = np.zeros(D, dtype=np.int64)
    z_script = np.zeros(D, dtype=np.int64)
    u_vec = np.zeros(D, dtype=np.int64)
    u_full = np.zeros(D, dtype=np.int64)
    e_disp = np.zeros(D, dtype=np.int64)
    pair_sums: dict[int, np.ndarray] = {}

    for k in range(1, k_top + 1):
        p, d = p_value(k), d_value(k)
        width = n + p - 1
        weights = np.minimum(np.minimum(np.arange(1, width + 1), n),
                             np.minimum(p, width - np.arange(width))).astype(np.int64)
        pos = np.empty((D, width), dtype=np.int64)
        mir = np.empty((D, width), dtype=np.int64)
        o = traj.origin
        for i in range(1, D + 1):
            pos[i - 1] = _layer_values_abs(traj, k, i, o, o + width)
            mir[i - 1] = _layer_values_abs(traj, k, i, o + d, o + d + width)
        s_k = (pos - mir) @ weights
        if k in sets.small:
            z_sm += s_k
        elif k in sets.medium:
            y_hat += s_k
            plateau = (pos[:, p - 1:n] - mir[:, p - 1:n]).sum(axis=1)
            w_vec += p * plateau
            ramp_a = np.arange(1, p, dtype=np.int64)
            a_sum = (pos[:, :p - 1] - mir[:, :p - 1]) @ ramp_a
            c_sum = (pos[:, n:width] - mir[:, n:width]) @ ramp_a[::-1]
            z_script += a_sum + c_sum
        else:
            z_la += s_k
        lo = 1 << k
        if lo <= n - 1:
            pair_sums[k] = (pos[:, lo:n] - mir[:, lo:n]).sum(axis=1)
        else:
            pair_sums[k] = np.zeros(D, dtype=np.int64)
        if k in sets.i_hat:
            e_disp += p * (pos[:, p - 1] - mir[:, p - 1])

    for k in sorted(sets.i_full):
        term = p_value(k) * pair_sums[k] + p_value(k + 1) * pair_sums[k + 1]
        u_full += term
        if k in sets.i_hat:
            u_vec += term
    v_extra = u_full - u_vec

    # unpaired medium layers enter e: odd l whose even partner left the
    # medium regime (d_{l-1} <= n), and even k with n <= p_{k+1}
    for l in sorted(sets.medium):
        paired = (l % 2 == 0 and l in sets.i_hat) or \
                 (l % 2 == 1 and (l - 1) in sets.i_hat)
        if paired:
            continue
        p, d = p_value(l), d_value(l)
        o = traj.origin
        block_pos = np.empty((D, n - p + 1), dtype=np.int64)
        block_mir = np.empty((D, n - p + 1), dtype=np.int64)
        for i in range(1, D + 1):
            block_pos[i - 1] = _layer_values_abs(traj, l, i, o + p - 1, o + n)
            block_mir[i - 1] = _layer_values_abs(traj, l, i, o + d + p - 1, o + d + n)
        e_disp += p * (block_pos - block_mir).sum(axis=1)

    s_n = z_sm + y_hat + z_la
    return DecompositionReport(n, s_n, z_sm, y_hat, z_la, w_vec, u_vec,
                               w_vec - u_vec, z_script, v_extra, e_disp, u_full)


# --------------------------------------------------------------------------
# exact laws
# --------------------------------------------------------------------------

TRIM_EPS = 1e-14
TRIM_EPS_U = 1e-18  # paired-sum laws carry a 1e-9 relative variance contract


def exact_dist_U(n: int, dim: int = 1) -> lattice.ProductDist:
    """Exact law of the paired medium-layer sum at time n (product over dim).

    Per component: over even k with p_{k+1} < n < d_k, convolve n - 2^k
    independent coboundary pairs of weight p_k and n - 2^(k+1) of weight
    p_{k+1}.
    """
    if n < 2:
        raise ValueError("exact_dist_U needs n >= 2")
    sets = index_sets(n, max(3, math.ceil(math.log2(n))) + 1)
    comp = lattice.delta(0)
    for k in sorted(sets.i_hat):
        for l, copies in ((k, n - (1 << k)), (k + 1, n - (1 << (k + 1)))):
            base = lattice.centered_pair_law(alpha_sq(l), 1)
            agg = lattice.power(base, copies, trim_eps=TRIM_EPS_U)
            comp = lattice.convolve(comp, lattice.stride_scale(agg, p_value(l)))
            comp = lattice.tail_truncate(comp, TRIM_EPS_U)
    return lattice.ProductDist(tuple([comp] * dim))


def variance_U_closed_form(n: int) -> float:
    """Variance of one component of the paired sum, in closed form."""
    if n < 2:
        raise ValueError("variance_U_closed_form needs n >= 2")
    sets = index_sets(n, max(3, math.ceil(math.log2(n))) + 1)
    total = 0.0
    for k in sorted(sets.i_hat):
        for l, copies in ((k, n - (1 << k)), (k + 1, n - (1 << (k + 1)))):
            total += 2.0 * copies * p_value(l) ** 2 * float(alpha_sq(l))
    return total


def exact_dist_S(n: int, dim: int = 2, tol_l2sq: float = 0.01
                 ) -> tuple[lattice.ProductDist, float]:
    """Exact law of the truncated cocycle at time n, with the L2 residual.

    Convolves, per layer up to the certified truncation level, one ternary
    law per distinct net weight (grouped by multiplicity); identical
    independent components.
    """
    if n < 1:
        raise ValueError("exact_dist_S needs n >= 1")
    k_top, residual = schedule.truncation_level(max(n, 2), tol_l2sq)
    comp = lattice.delta(0)
    for k in range(1, k_top + 1):
        a2 = alpha_sq(k)
        mults: dict[int, int] = {}
        for _, length, value in schedule.net_weight_profile(n, k):
            c = abs(value)
            mults[c] = mults.get(c, 0) + length
        base = lattice.ternary_law(a2, 1)
        for c in sorted(mults):
            agg = lattice.power(base, mults[c], trim_eps=TRIM_EPS)
            comp = lattice.convolve(comp, lattice.stride_scale(agg, c))
            comp = lattice.tail_truncate(comp, TRIM_EPS)
    return lattice.ProductDist(tuple([comp] * dim)), residual


def paired_sum_coefficients(n: int, k_max: int, full: bool = False) -> dict[int, int]:
    """Layer -> multiplier map defining the paired sum at time n."""
    sets = index_sets(n, k_max)
    keys = sets.i_full if full else sets.i_hat
    coef: dict[int, int] = {}
    for k in keys:
        coef[k] = p_value(k)
        coef[k + 1] = p_value(k + 1)
    return coef


def dump_trajectory(traj: LayerTrajectory, times, path: str) -> None:
    """Replay CSV of cocycle values: one row (n, S_n components) per time."""
    qs = np.asarray(sorted(set(int(t) for t in times)), dtype=np.int64)
    vals = values_at_times(traj, qs)
    with open(path, "w") as f:
        f.write(f"# seed={traj.seed} k_max={traj.k_max} "
                f"residual_bound={traj.residual_bound!r}\n")
        f.write("n," + ",".join(f"s{i+1}" for i in range(traj.dim)) + "\n")
        for t, row in zip(qs, vals):
            f.write(f"{t}," + ",".join(str(int(v)) for v in row) + "\n")


def load_trajectory_dump(path: str) -> tuple[np.ndarray, np.ndarray]:
    """(times, values) arrays from a replay CSV."""
    times, rows = [], []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("n,"):
                continue
            parts = line.split(",")
            times.append(int(parts[0]))
            rows.append([int(v) for v in parts[1:]])
    return np.asarray(times, dtype=np.int64), np.asarray(rows, dtype=np.int64)


def sample_S(master_seed: int, n: int, count: int, idx_start: int = 0,
             k_max: int | None = None) -> np.ndarray:
    """Monte Carlo S_n(F) over derived trajectory seeds; (count, 2) int64.

    Pass the k_max of the law being cross-checked so both sides realize the
    same truncation.
    """
    if k_max is None:
        k_max = max(3, math.ceil(math.log2(max(n, 2))))
    out_s, _ = engine.mc_cocycle(master_seed, n, count, k_max, idx_start)
    return out_s


def sample_S_and_U(master_seed: int, n: int, count: int, idx_start: int = 0):
    """Monte Carlo (S_n(F), paired sum U(F, n)) over derived seeds."""
    k_max = max(3, math.ceil(math.log2(max(n, 2))))
    coef = paired_sum_coefficients(n, k_max)
    return engine.mc_cocycle(master_seed, n, count, k_max, idx_start, ucoef=coef)
