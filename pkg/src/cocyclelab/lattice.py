"""Exact probability mass functions on integer intervals.

A LatticeDist is a dense nonnegative mass array over a contiguous integer
support plus a tracked tail defect (mass deliberately trimmed away).  All
operations conserve mass + defect to 1e-12 and are pure; convolution picks
a direct or FFT path by size, both agreeing to 1e-12 total variation.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.signal import fftconvolve

SUPPORT_GUARD = 1 << 26
FFT_THRESHOLD = 1 << 22  # direct convolution below |a|*|b| of this size
MASS_TOL = 1e-12


class SupportOverflowError(ValueError):
    """Support grew past the guard; tail_truncate before convolving."""


@dataclass(frozen=True)
class LatticeDist:
    offset: int            # value of the first support point
    mass: np.ndarray       # float64, first and last entries nonzero
    defect: float = 0.0    # mass removed by tail truncation

    def __post_init__(self):
        if self.mass.ndim != 1 or len(self.mass) == 0:
            raise ValueError("mass must be a nonempty 1-D array")
        if self.defect < 0:
            raise ValueError("defect must be nonnegative")

    @property
    def support(self) -> np.ndarray:
        return self.offset + np.arange(len(self.mass), dtype=np.int64)

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.mass))

    def prob(self, x: int) -> float:
        i = x - self.offset
        if 0 <= i < len(self.mass):
            return float(self.mass[i])
        return 0.0


def make_dist(offset: int, mass: np.ndarray, defect: float = 0.0) -> LatticeDist:
    """Canonicalize: clip negative rounding noise, trim zero ends."""
    m = np.asarray(mass, dtype=np.float64)
    neg = m < 0
    if np.any(neg):
        if float(-m[neg].sum()) > 1e-9:
            raise ValueError("mass array has substantially negative entries")
        m = np.where(neg, 0.0, m)
    nz = np.nonzero(m)[0]
    if len(nz) == 0:
        raise ValueError("distribution has no mass")
    lo, hi = int(nz[0]), int(nz[-1])
    return LatticeDist(offset + lo, np.ascontiguousarray(m[lo:hi + 1]), float(defect))


def delta(x: int = 0) -> LatticeDist:
    return LatticeDist(x, np.array([1.0]))


def ternary_law(alpha_sq: float | Fraction, weight: int) -> LatticeDist:
    """Law of w*X for the ternary layer variable X with P(+-1) = alpha^2/2."""
    a = float(alpha_sq)
    if not 0.0 < a <= 1.0:
        raise ValueError(f"alpha_sq must lie in (0, 1], got {a}")
    w = abs(int(weight))
    if w == 0:
        return delta(0)
    m = np.zeros(2 * w + 1)
    m[0] = m[-1] = a / 2.0
    m[w] = 1.0 - a
    return LatticeDist(-w, m)


def centered_pair_law(alpha_sq: float | Fraction, weight: int) -> LatticeDist:
    """Law of w*(X - Y) for independent ternary X, Y (the coboundary pair)."""
    a = float(alpha_sq)
    if not 0.0 < a <= 1.0:
        raise ValueError(f"alpha_sq must lie in (0, 1], got {a}")
    w = abs(int(weight))
    if w == 0:
        return delta(0)
    e = a / 2.0
    m = np.zeros(4 * w + 1)
    m[0] = m[-1] = e * e
    m[w] = m[-w - 1] = 2.0 * e * (1.0 - a)
    m[2 * w] = (1.0 - a) ** 2 + 2.0 * e * e
    return LatticeDist(-2 * w, m)


def convolve(a: LatticeDist, b: LatticeDist) -> LatticeDist:
    n_out = len(a.mass) + len(b.mass) - 1
    if n_out > SUPPORT_GUARD:
        raise SupportOverflowError(
            f"convolution support {n_out} exceeds guard {SUPPORT_GUARD}; "
            "tail_truncate the inputs first")
    if len(a.mass) * len(b.mass) <= FFT_THRESHOLD:
        m = np.convolve(a.mass, b.mass)
    else:
        m = fftconvolve(a.mass, b.mass)
        np.maximum(m, 0.0, out=m)
    expected = a.total_mass * b.total_mass
    defect = a.defect + b.defect + max(0.0, expected - float(m.sum()))
    return make_dist(a.offset + b.offset, m, defect)


def moments(d: LatticeDist) -> tuple[float, float]:
    x = d.support.astype(np.float64)
    tot = d.total_mass
    mean = float(np.dot(x, d.mass)) / tot
    var = float(np.dot((x - mean) ** 2, d.mass)) / tot
    return mean, var


def tail_truncate(d: LatticeDist, eps: float) -> LatticeDist:
    """Trim the least-mass outer tails, removing at most eps extra mass."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if eps == 0.0:
        return d
    m = d.mass
    lo, hi = 0, len(m) - 1
    removed = 0.0
    while lo < hi:
        if m[lo] == m[hi]:
            # trim tied ends together so symmetric laws stay symmetric
            if removed + 2.0 * m[lo] > eps:
                break
            removed += 2.0 * m[lo]
            lo += 1
            hi -= 1
            continue
        take = min(m[lo], m[hi])
        if removed + take > eps:
            break
        removed += take
        if m[lo] < m[hi]:
            lo += 1
        else:
            hi -= 1
    return make_dist(d.offset + lo, m[lo:hi + 1].copy(), d.defect + removed)


def power(d: LatticeDist, m: int, trim_eps: float = 0.0) -> LatticeDist:
    """m-fold self-convolution by binary exponentiation, trimming per step."""
    if m < 0:
        raise ValueError("power needs m >= 0")
    acc = delta(0)
    sq = d
    while m:
        if m & 1:
            acc = convolve(acc, sq)
            if trim_eps:
                acc = tail_truncate(acc, trim_eps)
        m >>= 1
        if m:
            sq = convolve(sq, sq)
            if trim_eps:
                sq = tail_truncate(sq, trim_eps)
    return acc


def stride_scale(d: LatticeDist, c: int) -> LatticeDist:
    """Law of c*X (support spread onto stride |c|)."""
    c = int(c)
    if c == 0:
        return delta(0) if d.defect == 0 else LatticeDist(0, np.array([d.total_mass]), d.defect)
    n = len(d.mass)
    m = np.zeros((n - 1) * abs(c) + 1)
    m[::abs(c)] = d.mass if c > 0 else d.mass[::-1]
    off = d.offset * c if c > 0 else (d.offset + n - 1) * c
    return LatticeDist(off, m, d.defect)


def char_fn(d: LatticeDist, t: float) -> complex:
    x = d.support.astype(np.float64)
    return complex(np.sum(d.mass * np.exp(1j * t * x)))


def char_fn_grid(d: LatticeDist, ts: np.ndarray) -> np.ndarray:
    x = d.support.astype(np.float64)
    return np.exp(1j * np.outer(ts, x)) @ d.mass


def tv_distance(a: LatticeDist, b: LatticeDist) -> float:
    lo = min(a.offset, b.offset)
    hi = max(a.offset + len(a.mass), b.offset + len(b.mass))
    pa = np.zeros(hi - lo)
    pb = np.zeros(hi - lo)
    pa[a.offset - lo:a.offset - lo + len(a.mass)] = a.mass
    pb[b.offset - lo:b.offset - lo + len(b.mass)] = b.mass
    return 0.5 * float(np.abs(pa - pb).sum())


@dataclass(frozen=True)
class ProductDist:
    """Independent-coordinate product of 1-D lattice laws."""

    components: tuple[LatticeDist, ...]

    def __post_init__(self):
        if len(self.components) < 1:
            raise ValueError("product needs at least one component")

    @property
    def dim(self) -> int:
        return len(self.components)

    @property
    def defect(self) -> float:
        return sum(c.defect for c in self.components)


@dataclass(frozen=True)
class GapResult:
    gap: float          # sup over the grid of n^(D/2) |P(x) - gaussian|
    defect_term: float  # n^(D/2) * total defect, reported separately

    @property
    def certified(self) -> float:
        return self.gap + self.defect_term


def _padded_component(c: LatticeDist, box: int) -> tuple[np.ndarray, np.ndarray]:
    lo = min(c.offset, -box)
    hi = max(c.offset + len(c.mass) - 1, box)
    p = np.zeros(hi - lo + 1)
    p[c.offset - lo:c.offset - lo + len(c.mass)] = c.mass
    return np.arange(lo, hi + 1, dtype=np.float64), p


def sup_lclt_gap(dist: ProductDist, n: int, sigma_sq: float) -> GapResult:
    """sup_x n^(D/2) |P(x) - gaussian density|, on support + significant box.

    The comparison grid extends to ||x||_inf <= 8*sqrt(n*sigma_sq*D) so the
    regime P(x) = 0 with positive gaussian mass is covered.  Supported for
    D in {1, 2}; the construction never needs more.
    """
    if n < 1 or sigma_sq <= 0:
        raise ValueError("sup_lclt_gap needs n >= 1 and sigma_sq > 0")
    d = dist.dim
    if d not in (1, 2):
        raise NotImplementedError("sup_lclt_gap implemented for D in {1, 2}")
    box = int(np.ceil(8.0 * np.sqrt(n * sigma_sq * d)))
    scale = float(n) ** (d / 2.0)
    if d == 1:
        x, p = _padded_component(dist.components[0], box)
        g = np.exp(-x * x / (2.0 * n * sigma_sq)) / np.sqrt(2.0 * np.pi * n * sigma_sq)
        gap = float(np.max(np.abs(p - g))) * scale
    else:
        x1, p1 = _padded_component(dist.components[0], box)
        x2, p2 = _padded_component(dist.components[1], box)
        g1 = np.exp(-x1 * x1 / (2.0 * n * sigma_sq)) / np.sqrt(2.0 * np.pi * n * sigma_sq)
        g2 = np.exp(-x2 * x2 / (2.0 * n * sigma_sq)) / np.sqrt(2.0 * np.pi * n * sigma_sq)
        gap = float(np.max(np.abs(np.outer(p1, p2) - np.outer(g1, g2)))) * scale
    return GapResult(gap, scale * dist.defect)


# --------------------------------------------------------------------------
# serialization (documented in the README)
# --------------------------------------------------------------------------

def to_csv(d: LatticeDist, path: str) -> None:
    with open(path, "w") as f:
        f.write(f"# defect={float(d.defect)!r}\n")
        f.write("x,p\n")
        for x, p in zip(d.support, d.mass):
            f.write(f"{x},{float(p)!r}\n")


def from_csv(path: str) -> LatticeDist:
    defect = 0.0
    xs, ps = [], []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if line.startswith("# defect="):
                defect = float(line.split("=", 1)[1])
            elif line and not line.startswith("#") and not line.startswith("x,"):
                x, p = line.split(",")
                xs.append(int(x))
                ps.append(float(p))
    if xs != list(range(xs[0], xs[0] + len(xs))):
        raise ValueError("csv support must be a contiguous integer interval")
    return LatticeDist(xs[0], np.array(ps), defect)


def to_bytes(d: LatticeDist) -> bytes:
    """Little-endian: int64 offset, int64 length, float64*length, float64 defect."""
    head = struct.pack("<qq", d.offset, len(d.mass))
    return head + d.mass.astype("<f8").tobytes() + struct.pack("<d", d.defect)


def from_bytes(buf: bytes) -> LatticeDist:
    offset, length = struct.unpack_from("<qq", buf, 0)
    mass = np.frombuffer(buf, dtype="<f8", count=length, offset=16).copy()
    (defect,) = struct.unpack_from("<d", buf, 16 + 8 * length)
    return LatticeDist(offset, mass, defect)
