"""Deterministic counter-based random streams.

Every random quantity in this package is a pure function of a 64-bit seed
and a structured key, evaluated through one documented mixing function, so
any site can be re-read in O(1) without storing streams.

Mixer
-----
``fin`` is the SplitMix64 finalizer (full-avalanche 64-bit mixer)::

    fin(z): z ^= z >> 30; z *= 0xBF58476D1CE4E5B9
            z ^= z >> 27; z *= 0x94D049BB133111EB
            z ^= z >> 31

Stream bases chain tags through ``fin``::

    base(seed, t1, t2, ...) = fin(... fin(fin(seed ^ t1*G) ^ t2*G) ...)

with G = 0x9E3779B97F4A7C15 (the 64-bit golden ratio), and the value at
counter r >= 0 of a stream is ``fin(base + r*G)`` -- exactly the SplitMix64
sequence started at ``base``.

Layer sites
-----------
The ternary layer variable of layer k, component i, at orbit site j is::

    window w = 0 if j < d_k else 1,   offset r = j  or  j - d_k
    u = fin(layer_base(seed, k, i, w) + r*G)
    value = +1 if u < t_plus(k), -1 if u < t_minus(k), else 0

with exact integer thresholds t_plus(k) = floor(alpha_k^2/2 * 2^64) and
t_minus(k) = floor(alpha_k^2 * 2^64); the per-read bias against the ideal
Bernoulli marginals is below 2^-64.  The (window, offset) split keeps every
counter below 2^63 even though the mirror offset d_k = 2^(k^2) is
astronomically large; the map j -> (w, r) is injective, so distinct sites
never alias.

Configuration bits
------------------
The fair bit of the Z^2 configuration at cell (x, y) is the top bit of::

    fin(fin(omega_base(seed) + zigzag(x)*G) + zigzag(y)*G)

Sub-seeds for trajectory ensembles are ``fin(master ^ TAG_TRAJ*G + idx*G)``.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from numba import njit

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

# key-domain tags, chained into stream bases
TAG_LAYER = 0x1B
TAG_OMEGA = 0x2C
TAG_TRAJ = 0x3D

_U = np.uint64


def fin(z: int) -> int:
    """SplitMix64 finalizer on python ints (reference implementation)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def chain(seed: int, *tags: int) -> int:
    """Stream base: fold tags into the seed through the finalizer."""
    z = seed & MASK64
    for t in tags:
        z = fin(z ^ ((t * GOLDEN) & MASK64))
    return z


def stream_at(base: int, r: int) -> int:
    """Value of the stream at counter r (the SplitMix64 sequence)."""
    if r < 0:
        raise ValueError("stream counter must be nonnegative")
    return fin((base + r * GOLDEN) & MASK64)


def layer_base(seed: int, k: int, i: int, window: int) -> int:
    return chain(seed, TAG_LAYER, k, i, window)


def omega_base(seed: int) -> int:
    return chain(seed, TAG_OMEGA)


def derive_seed(master: int, index: int) -> int:
    """Sub-seed for the index-th trajectory of an ensemble."""
    return stream_at(chain(master, TAG_TRAJ), index)


def zigzag(n: int) -> int:
    """Signed -> unsigned, small magnitudes first: 0,-1,1,-2,2 -> 0,1,2,3,4."""
    return (n << 1) ^ (n >> 63) if n >= 0 else ((-n) << 1) - 1


def omega_bit(seed: int, cell: tuple[int, int]) -> int:
    x, y = cell
    z = stream_at(omega_base(seed), zigzag(int(x)))
    z = stream_at(z, zigzag(int(y)))
    return z >> 63


# --------------------------------------------------------------------------
# exact thresholds
# --------------------------------------------------------------------------

def _alpha_sq_denominator(k: int) -> int | None:
    """Integer q with alpha_k^2 = 1/q when log2(k) is an integer, else None."""
    from .schedule import p_value

    if k == 1:
        return 4
    m = k.bit_length() - 1
    if k == (1 << m):
        return p_value(k) ** 2 * k * m
    return None


@lru_cache(maxsize=None)
def thresholds(k: int) -> tuple[int, int]:
    """(t_plus, t_minus) = exact floors of alpha_k^2/2 * 2^64, alpha_k^2 * 2^64.

    Rational alpha_k^2 (k a power of two) uses integer division; otherwise
    the floor is taken at 256-bit precision, which is far more than enough
    to resolve it past the 64 bits that matter.
    """
    from .schedule import p_value

    q = _alpha_sq_denominator(k)
    if q is not None:
        return ((1 << 63) // q, (1 << 64) // q)
    import mpmath

    with mpmath.workprec(256):
        a2 = 1 / (mpmath.mpf(p_value(k)) ** 2 * k * mpmath.log(k, 2))
        t_minus = int(mpmath.floor(a2 * mpmath.mpf(2) ** 64))
        t_plus = int(mpmath.floor(a2 * mpmath.mpf(2) ** 63))
    return t_plus, t_minus


def layer_site_value(seed: int, k: int, i: int, j: int, d_k: int) -> int:
    """Ternary layer value at absolute orbit site j (arbitrary python int)."""
    if j < d_k:
        window, r = 0, j
    else:
        window, r = 1, j - d_k
    if r >= (1 << 63):
        raise ValueError("site offset beyond supported window (2^63)")
    u = stream_at(layer_base(seed, k, i, window), r)
    t_plus, t_minus = thresholds(k)
    if u < t_plus:
        return 1
    if u < t_minus:
        return -1
    return 0


# --------------------------------------------------------------------------
# vectorized variants (numpy on uint64, wrapping arithmetic)
# --------------------------------------------------------------------------

def _fin_np(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _U(30))) * _U(_M1)
    z = (z ^ (z >> _U(27))) * _U(_M2)
    return z ^ (z >> _U(31))


def stream_block(base: int, start: int, count: int) -> np.ndarray:
    """uint64 stream values at counters start..start+count-1."""
    ctr = _U(base) + (_U(start) + np.arange(count, dtype=np.uint64)) * _U(GOLDEN)
    return _fin_np(ctr)


def layer_block(seed: int, k: int, i: int, window: int, start: int, count: int) -> np.ndarray:
    """int8 ternary values at offsets start..start+count-1 of one window."""
    u = stream_block(layer_base(seed, k, i, window), start, count)
    t_plus, t_minus = thresholds(k)
    out = np.zeros(count, dtype=np.int8)
    out[u < _U(t_minus)] = -1
    out[u < _U(t_plus)] = 1
    return out


def omega_bits(seed: int, cells: np.ndarray) -> np.ndarray:
    """Bits at an (m, 2) int64 cell array."""
    zz = lambda v: (v.astype(np.int64) << 1) ^ (v.astype(np.int64) >> 63)
    base = _U(omega_base(seed))
    z = _fin_np(base + zz(cells[:, 0]).view(np.uint64) * _U(GOLDEN))
    z = _fin_np(z + zz(cells[:, 1]).view(np.uint64) * _U(GOLDEN))
    return (z >> _U(63)).astype(np.int64)


def omega_bits_over_seeds(seeds: np.ndarray, cell: tuple[int, int]) -> np.ndarray:
    """Bit at one cell across a uint64 seed array (seeds already mixed in)."""
    zx = _U((zigzag(int(cell[0])) * GOLDEN) & MASK64)
    zy = _U((zigzag(int(cell[1])) * GOLDEN) & MASK64)
    base = _fin_np(seeds ^ _U((TAG_OMEGA * GOLDEN) & MASK64))
    z = _fin_np(base + zx)
    z = _fin_np(z + zy)
    return (z >> _U(63)).astype(np.int64)


# --------------------------------------------------------------------------
# numba building blocks, shared by the trajectory kernels
# --------------------------------------------------------------------------

@njit(cache=True, inline="always")
def nb_fin(z):
    z = (z ^ (z >> _U(30))) * _U(_M1)
    z = (z ^ (z >> _U(27))) * _U(_M2)
    return z ^ (z >> _U(31))
