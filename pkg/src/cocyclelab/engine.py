"""Streaming evaluation kernels for layer-built cocycles.

The cocycle value at time n is a trapezoid-weighted sum of ternary layer
sites minus the same sum at mirror offsets d_k.  For a sorted batch of
query times the kernel streams every relevant site once: a site at
position j contributes ``sign * min(n - lo, j + 1 - lo)`` to each query
n > lo (lo = max(0, j - p + 1)), i.e. a linear ramp in n that saturates at
n > j.  Ramps are accumulated into slope/intercept/constant difference
arrays indexed by query, with monotone pointers instead of searches, so
the per-site cost beyond the stream read is O(1) amortized.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .streams import GOLDEN, TAG_LAYER, TAG_TRAJ, layer_base, nb_fin, thresholds
from .schedule import d_value, p_value

_U = np.uint64
_G = _U(GOLDEN)


@njit(cache=True, inline="always")
def _nb_chain(z, tag):
    return nb_fin(z ^ (_U(tag) * _G))


@njit(cache=True, inline="always")
def _nb_layer_base(seed, k, i, window):
    z = _nb_chain(seed, TAG_LAYER)
    z = nb_fin(z ^ (_U(k) * _G))
    z = nb_fin(z ^ (_U(i) * _G))
    return nb_fin(z ^ (_U(window) * _G))


@njit(cache=True, inline="always")
def _apply_ramp(s, j, p, qs, slope, inter, constv, comp, ptrs, base_ptr):
    # ramp of a nonzero site at position j: queries n in (lo, j] get slope,
    # queries n > j get the saturated constant
    nq = qs.shape[0]
    lo = j - p + 1
    if lo < 0:
        lo = 0
    t1 = ptrs[base_ptr]
    while t1 < nq and qs[t1] <= lo:
        t1 += 1
    ptrs[base_ptr] = t1
    t2 = ptrs[base_ptr + 1]
    while t2 < nq and qs[t2] <= j:
        t2 += 1
    ptrs[base_ptr + 1] = t2
    slope[comp, t1] += s
    slope[comp, t2] -= s
    inter[comp, t1] -= s * lo
    inter[comp, t2] += s * lo
    constv[comp, t2] += s * (j + 1 - lo)


@njit(cache=True, inline="always")
def _apply_vsum(s, i, qs, vdiff, comp, ptrs, ptr_ix, v_lo):
    if i < v_lo:
        return
    nq = qs.shape[0]
    t = ptrs[ptr_ix]
    while t < nq and qs[t] <= i:
        t += 1
    ptrs[ptr_ix] = t
    vdiff[comp, t] += s


@njit(cache=True)
def scan_window(base1, base2, t_plus, t_minus, nsites, p, plus_base,
                has_minus, wpos_max, qs, slope, inter, constv,
                want_v, v_lo, vminus_on, vdiff):
    """Stream one window of one layer for two components.

    plus_base >= 0: sites carry the positive trapezoid at j = plus_base + r.
    has_minus: sites carry the mirror trapezoid at j = r.
    vplus_base >= 0 / vminus_on: range-sum accumulation (for the paired-sum
    decomposition terms) at stream index plus_base + r / r.
    """
    c1 = base1
    c2 = base2
    # pointer slots: 0,1 plus-ramp; 2,3 minus-ramp; 4 v-plus; 5 v-minus
    ptrs = np.zeros(6, dtype=np.int64)
    for r in range(nsites):
        z1 = nb_fin(c1)
        c1 += _G
        z2 = nb_fin(c2)
        c2 += _G
        if z1 < t_minus:
            s = 1 if z1 < t_plus else -1
            if plus_base >= 0:
                jp = plus_base + r
                if jp <= wpos_max:
                    _apply_ramp(s, jp, p, qs, slope, inter, constv, 0, ptrs, 0)
                    if want_v:
                        _apply_vsum(s, jp, qs, vdiff, 0, ptrs, 4, v_lo)
            if has_minus:
                _apply_ramp(-s, r, p, qs, slope, inter, constv, 0, ptrs, 2)
                if want_v and vminus_on:
                    _apply_vsum(-s, r, qs, vdiff, 0, ptrs, 5, v_lo)
        if z2 < t_minus:
            s = 1 if z2 < t_plus else -1
            if plus_base >= 0:
                jp = plus_base + r
                if jp <= wpos_max:
                    _apply_ramp(s, jp, p, qs, slope, inter, constv, 1, ptrs, 0)
                    if want_v:
                        _apply_vsum(s, jp, qs, vdiff, 1, ptrs, 4, v_lo)
            if has_minus:
                _apply_ramp(-s, r, p, qs, slope, inter, constv, 1, ptrs, 2)
                if want_v and vminus_on:
                    _apply_vsum(-s, r, qs, vdiff, 1, ptrs, 5, v_lo)


@njit(cache=True)
def scan_disjoint_pair(b1w0, b2w0, b1w1, b2w1, t_plus, t_minus, nsites, p,
                       wpos_max, qs, slope, inter, constv, want_v, v_lo, vdiff):
    """Both windows of one layer in a single pass (mirror fully disjoint).

    Window-0 sites carry the positive trapezoid at j = r, window-1 sites the
    mirror trapezoid at j = r; the four stream chains are independent, which
    keeps the site loop throughput-bound.
    """
    c10 = b1w0
    c20 = b2w0
    c11 = b1w1
    c21 = b2w1
    ptrs = np.zeros(6, dtype=np.int64)
    for r in range(nsites):
        z10 = nb_fin(c10)
        c10 += _G
        z20 = nb_fin(c20)
        c20 += _G
        z11 = nb_fin(c11)
        c11 += _G
        z21 = nb_fin(c21)
        c21 += _G
        if z10 < t_minus:
            s = 1 if z10 < t_plus else -1
            _apply_ramp(s, r, p, qs, slope, inter, constv, 0, ptrs, 0)
            if want_v:
                _apply_vsum(s, r, qs, vdiff, 0, ptrs, 4, v_lo)
        if z20 < t_minus:
            s = 1 if z20 < t_plus else -1
            _apply_ramp(s, r, p, qs, slope, inter, constv, 1, ptrs, 0)
            if want_v:
                _apply_vsum(s, r, qs, vdiff, 1, ptrs, 4, v_lo)
        if z11 < t_minus:
            s = 1 if z11 < t_plus else -1
            _apply_ramp(-s, r, p, qs, slope, inter, constv, 0, ptrs, 2)
            if want_v:
                _apply_vsum(-s, r, qs, vdiff, 0, ptrs, 5, v_lo)
        if z21 < t_minus:
            s = 1 if z21 < t_plus else -1
            _apply_ramp(-s, r, p, qs, slope, inter, constv, 1, ptrs, 2)
            if want_v:
                _apply_vsum(-s, r, qs, vdiff, 1, ptrs, 5, v_lo)


def eval_times(seed: int, k_max: int, times, want_v: bool = False,
               components: tuple[int, int] = (1, 2)):
    """Cocycle values of components at sorted query times (origin 0).

    Returns (values, vsums): values is (len(times), 2) int64; vsums maps
    layer l to a (len(times), 2) int64 array of the paired range sums
    sum_{i=2^l}^{n-1} (X_i - X_{d_l+i}) when want_v is set.
    """
    qs = np.asarray(times, dtype=np.int64)
    if len(qs) == 0:
        return np.zeros((0, 2), dtype=np.int64), {}
    if np.any(np.diff(qs) < 0):
        raise ValueError("query times must be sorted ascending")
    if qs[0] < 0:
        raise ValueError("query times must be nonnegative")
    n_max = int(qs[-1])
    nq = len(qs)
    slope = np.zeros((2, nq + 1), dtype=np.int64)
    inter = np.zeros((2, nq + 1), dtype=np.int64)
    constv = np.zeros((2, nq + 1), dtype=np.int64)
    vsums: dict[int, np.ndarray] = {}
    for k in range(1, k_max + 1):
        t_plus, t_minus = thresholds(k)
        if t_minus == 0:
            if want_v:
                vsums[k] = np.zeros((nq, 2), dtype=np.int64)
            continue
        p = p_value(k)
        d = d_value(k)
        width = n_max + p  # positive sites live in [0, width)
        wpos_max = width - 1
        vdiff = np.zeros((2, nq + 1), dtype=np.int64)
        v_lo = 1 << k
        b1w0 = _U(layer_base(seed, k, components[0], 0))
        b2w0 = _U(layer_base(seed, k, components[1], 0))
        b1w1 = _U(layer_base(seed, k, components[0], 1))
        b2w1 = _U(layer_base(seed, k, components[1], 1))
        overlap = d < width
        if not overlap:
            scan_disjoint_pair(b1w0, b2w0, b1w1, b2w1, _U(t_plus), _U(t_minus),
                               width, p, wpos_max, qs, slope, inter, constv,
                               want_v, v_lo, vdiff)
        else:
            scan_window(b1w0, b2w0, _U(t_plus), _U(t_minus), min(d, width), p,
                        0, False, wpos_max, qs, slope, inter, constv,
                        want_v, v_lo, False, vdiff)
            scan_window(b1w1, b2w1, _U(t_plus), _U(t_minus), width, p,
                        d, True, wpos_max, qs, slope, inter,
                        constv, want_v, v_lo, True, vdiff)
        if want_v:
            vsums[k] = np.cumsum(vdiff[:, :nq], axis=1).T.copy()
    values = (np.cumsum(slope[:, :nq], axis=1) * qs[None, :]
              + np.cumsum(inter[:, :nq], axis=1)
              + np.cumsum(constv[:, :nq], axis=1)).T
    return np.ascontiguousarray(values), vsums


@njit(cache=True)
def _mc_scan(traj_base, idx_start, count, n, ks, ps, vlos, ds_small, overlaps,
             t_plus_arr, t_minus_arr, ucoef, out_s, out_u):
    for t in range(count):
        seed = nb_fin(traj_base + _U(idx_start + t) * _G)
        for c in range(2):
            s_acc = np.int64(0)
            u_acc = np.int64(0)
            for li in range(ks.shape[0]):
                k = ks[li]
                p = ps[li]
                width = n + p
                v_lo = vlos[li]
                coef = ucoef[li]
                overlap = overlaps[li]
                d = ds_small[li]
                n0 = d if (overlap and d < width) else width
                base = _nb_layer_base(seed, k, c + 1, 0)
                ctr = base
                tp = t_plus_arr[li]
                tm = t_minus_arr[li]
                for r in range(n0):
                    z = nb_fin(ctr)
                    ctr += _G
                    if z < tm:
                        s = 1 if z < tp else -1
                        lo = r - p + 1
                        if lo < 0:
                            lo = 0
                        cap = r + 1 - lo
                        w = n - lo
                        if w > cap:
                            w = cap
                        if w > 0:
                            s_acc += s * w
                        if coef != 0 and r >= v_lo and r < n:
                            u_acc += s * coef
                base = _nb_layer_base(seed, k, c + 1, 1)
                ctr = base
                for r in range(width):
                    z = nb_fin(ctr)
                    ctr += _G
                    if z < tm:
                        s = 1 if z < tp else -1
                        lo = r - p + 1
                        if lo < 0:
                            lo = 0
                        cap = r + 1 - lo
                        w = n - lo
                        if w > cap:
                            w = cap
                        if w > 0:
                            s_acc -= s * w
                        if coef != 0 and r >= v_lo and r < n:
                            u_acc -= s * coef
                        if overlap:
                            jp = d + r
                            if jp < width:
                                lo = jp - p + 1
                                if lo < 0:
                                    lo = 0
                                cap = jp + 1 - lo
                                w = n - lo
                                if w > cap:
                                    w = cap
                                if w > 0:
                                    s_acc += s * w
                                if coef != 0 and jp >= v_lo and jp < n:
                                    u_acc += s * coef
            out_s[t, c] = s_acc
            out_u[t, c] = u_acc


def mc_cocycle(master_seed: int, n: int, count: int, k_max: int,
               idx_start: int = 0, ucoef: dict[int, int] | None = None):
    """S_n(F) (and optionally the paired sum U) over derived sub-seeds.

    ucoef maps layer l to its multiplier p_l when the layer participates in
    the paired sum for this n; returns (S, U) int64 arrays of shape
    (count, 2).
    """
    ks, ps, vlos, ds_small, overlaps, tp, tm, uc = [], [], [], [], [], [], [], []
    for k in range(1, k_max + 1):
        t_plus, t_minus = thresholds(k)
        if t_minus == 0:
            continue
        p = p_value(k)
        d = d_value(k)
        width = n + p
        ks.append(k)
        ps.append(p)
        vlos.append(1 << k)
        overlaps.append(d < width)
        ds_small.append(d if d < width else 0)
        tp.append(t_plus)
        tm.append(t_minus)
        uc.append(0 if ucoef is None else ucoef.get(k, 0))
    from .streams import chain

    traj_base = _U(chain(master_seed, TAG_TRAJ))
    out_s = np.zeros((count, 2), dtype=np.int64)
    out_u = np.zeros((count, 2), dtype=np.int64)
    _mc_scan(traj_base, idx_start, count, n,
             np.array(ks, dtype=np.int64), np.array(ps, dtype=np.int64),
             np.array(vlos, dtype=np.int64),
             np.array(ds_small, dtype=np.int64), np.array(overlaps, dtype=np.bool_),
             np.array(tp, dtype=np.uint64), np.array(tm, dtype=np.uint64),
             np.array(uc, dtype=np.int64), out_s, out_u)
    return out_s, out_u
