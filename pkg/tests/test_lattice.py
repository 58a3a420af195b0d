"""Exact lattice distributions: laws, convolution, gaps, serialization."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cocyclelab import lattice
from cocyclelab.lcltlab import SIGMA_SQ


def random_dist(rng, max_len=50):
    n = int(rng.integers(1, max_len))
    mass = rng.random(n) + 1e-3
    mass /= mass.sum() * (1 + rng.random() * 1e-13)
    return lattice.make_dist(int(rng.integers(-20, 20)), mass)


def test_ternary_law_examples():
    d = lattice.ternary_law(Fraction(1, 32), 1)
    assert d.prob(1) == d.prob(-1) == 1 / 64
    assert d.prob(0) == 31 / 32
    assert lattice.ternary_law(Fraction(1, 32), 0).prob(0) == 1.0
    d5 = lattice.ternary_law(0.25, 5)
    assert d5.prob(5) == d5.prob(-5) == 1 / 8
    assert sorted(d5.support[d5.mass > 0].tolist()) == [-5, 0, 5]
    with pytest.raises(ValueError):
        lattice.ternary_law(1.5, 1)
    with pytest.raises(ValueError):
        lattice.ternary_law(0.0, 1)


def test_centered_pair_examples():
    d = lattice.centered_pair_law(Fraction(1, 32), 4)
    assert d.prob(8) == d.prob(-8) == 1 / 4096
    assert d.prob(4) == d.prob(-4) == 31 / 1024
    assert d.prob(0) == 1923 / 2048
    mean, var = lattice.moments(d)
    assert mean == pytest.approx(0.0, abs=1e-15)
    assert var == pytest.approx(1.0, rel=1e-12)


def test_convolve_identity_and_coin():
    rng = np.random.default_rng(1)
    b = random_dist(rng)
    out = lattice.convolve(lattice.delta(0), b)
    assert out.offset == b.offset and np.allclose(out.mass, b.mass)
    coin = lattice.make_dist(-1, np.array([0.5, 0.0, 0.5]))
    two = lattice.convolve(coin, coin)
    assert two.prob(-2) == two.prob(2) == 0.25 and two.prob(0) == 0.5


def test_convolve_direct_vs_fft():
    rng = np.random.default_rng(2)
    a = random_dist(rng)
    b = random_dist(rng)
    direct = np.convolve(a.mass, b.mass)
    import scipy.signal

    fft = scipy.signal.fftconvolve(a.mass, b.mass)
    assert 0.5 * np.abs(direct - fft).sum() < 1e-12
    # the dispatcher picks fft on large inputs; force both paths to agree
    big = lattice.make_dist(0, np.full(3000, 1 / 3000))
    via_fft = lattice.convolve(big, big)  # 9e6 products > threshold
    via_direct = lattice.make_dist(0, np.convolve(big.mass, big.mass))
    assert lattice.tv_distance(via_fft, via_direct) < 1e-12


@given(st.integers(0, 2 ** 31), st.integers(2, 5))
@settings(max_examples=25, deadline=None)
def test_convolve_commutes_associates(seed, m):
    rng = np.random.default_rng(seed)
    dists = [random_dist(rng, 12) for _ in range(3)]
    ab = lattice.convolve(dists[0], dists[1])
    ba = lattice.convolve(dists[1], dists[0])
    assert lattice.tv_distance(ab, ba) < 1e-12
    abc1 = lattice.convolve(ab, dists[2])
    abc2 = lattice.convolve(dists[0], lattice.convolve(dists[1], dists[2]))
    assert lattice.tv_distance(abc1, abc2) < 1e-12


@given(st.integers(0, 2 ** 31))
@settings(max_examples=40, deadline=None)
def test_mass_conservation_under_ops(seed):
    rng = np.random.default_rng(seed)
    a = random_dist(rng)
    b = random_dist(rng)
    c = lattice.convolve(a, b)
    assert abs(c.total_mass + c.defect
               - (a.total_mass + a.defect) * (b.total_mass + b.defect)) < 1e-12
    t = lattice.tail_truncate(c, 1e-4)
    assert abs((t.total_mass + t.defect) - (c.total_mass + c.defect)) < 1e-12


def test_moments_additivity():
    rng = np.random.default_rng(3)
    a, b = random_dist(rng), random_dist(rng)
    c = lattice.convolve(a, b)
    ma, va = lattice.moments(a)
    mb, vb = lattice.moments(b)
    mc, vc = lattice.moments(c)
    assert mc == pytest.approx(ma + mb, abs=1e-9)
    assert vc == pytest.approx(va + vb, rel=1e-9)
    assert lattice.moments(lattice.delta(0)) == (0.0, 0.0)


def test_tail_truncate():
    d = lattice.make_dist(-3, np.array([1e-15, 0.3, 0.4, 0.3, 1e-15]))
    assert lattice.tail_truncate(d, 0.0) is d
    t = lattice.tail_truncate(d, 1e-12)
    assert len(t.mass) == 3 and t.defect <= 1e-12
    # wide gaussian-like law: trim keeps the budget
    x = np.arange(-400, 401)
    g = lattice.make_dist(-400, np.exp(-x * x / (2 * 30.0 ** 2)))
    g = lattice.make_dist(g.offset, g.mass / g.total_mass)
    tg = lattice.tail_truncate(g, 1e-12)
    assert tg.defect <= 1e-12 and len(tg.mass) < len(g.mass)
    # trimming moves the gap by at most the scaled trimmed mass
    n = 900
    before = lattice.sup_lclt_gap(lattice.ProductDist((g,)), n, SIGMA_SQ)
    after = lattice.sup_lclt_gap(lattice.ProductDist((tg,)), n, SIGMA_SQ)
    assert abs(after.gap - before.gap) <= math.sqrt(n) * 1e-12 + 1e-12


def test_char_fn():
    assert lattice.char_fn(lattice.delta(0), 0.7) == pytest.approx(1.0)
    d = lattice.centered_pair_law(0.1, 3)
    for t in (0.3, 1.1, 2.9):
        assert abs(lattice.char_fn(d, t).imag) < 1e-12
    a2 = 1 / 32
    pair = lattice.centered_pair_law(a2, 1)
    for t in (0.2, 0.9, 2.5):
        expect = (1 - a2 + a2 * math.cos(t)) ** 2
        assert lattice.char_fn(pair, t).real == pytest.approx(expect, abs=1e-12)


@given(st.integers(0, 2 ** 31), st.integers(1, 6))
@settings(max_examples=60, deadline=None)
def test_product_difference_triangle_bound(seed, m):
    rng = np.random.default_rng(seed)
    c = 1.0 + rng.random() * 3
    z = rng.uniform(-c, c, m)
    y = rng.uniform(-c, c, m)
    lhs = abs(np.prod(z) - np.prod(y))
    rhs = sum(c ** (m - 1) * abs(zi - yi) for zi, yi in zip(z, y))
    assert lhs <= rhs + 1e-12


def test_sup_lclt_gap_point_mass():
    g = lattice.sup_lclt_gap(lattice.ProductDist((lattice.delta(0),)), 1, SIGMA_SQ)
    assert g.gap == pytest.approx(0.59301, abs=2e-5)


def test_sup_lclt_gap_synthetic_gaussian():
    n = 10 ** 4
    s2 = SIGMA_SQ
    half = int(8 * math.sqrt(n * s2))
    x = np.arange(-half, half + 1, dtype=np.float64)
    mass = np.exp(-x * x / (2 * n * s2)) / math.sqrt(2 * math.pi * n * s2)
    d = lattice.LatticeDist(-half, mass)
    g = lattice.sup_lclt_gap(lattice.ProductDist((d,)), n, s2)
    assert g.gap <= 1e-3


def test_sup_lclt_gap_2d_two_paths():
    # direct 2-D evaluation against the product-difference bound from 1-D gaps
    n = 256
    half = 60
    x = np.arange(-half, half + 1, dtype=np.float64)
    mass = np.exp(-x * x / (2 * n * 0.9)) / math.sqrt(2 * math.pi * n * 0.9)
    comp = lattice.LatticeDist(-half, mass)
    prod = lattice.ProductDist((comp, comp))
    g2 = lattice.sup_lclt_gap(prod, n, SIGMA_SQ)
    g1 = lattice.sup_lclt_gap(lattice.ProductDist((comp,)), n, SIGMA_SQ)
    c_bound = max(float(np.sqrt(n) * comp.mass.max()),
                  1 / math.sqrt(2 * math.pi * SIGMA_SQ))
    assert g2.gap <= 2 * c_bound * g1.gap + 1e-9
    with pytest.raises(NotImplementedError):
        lattice.sup_lclt_gap(lattice.ProductDist((comp,) * 3), n, SIGMA_SQ)


def test_support_guard():
    wide = lattice.make_dist(0, np.full(1 << 14, 1.0 / (1 << 14)))
    grown = lattice.convolve(wide, wide)
    n = (1 << 25) + 8
    with pytest.raises(lattice.SupportOverflowError):
        lattice.convolve(lattice.make_dist(0, np.full(n, 1.0 / n)),
                         lattice.make_dist(0, np.full(n, 1.0 / n)))
    assert grown.total_mass == pytest.approx(1.0, abs=1e-9)


def test_serialization_roundtrip(tmp_path):
    rng = np.random.default_rng(5)
    d = lattice.LatticeDist(-7, rng.random(23) + 0.01, 1e-9)
    blob = lattice.to_bytes(d)
    back = lattice.from_bytes(blob)
    assert back.offset == d.offset and back.defect == d.defect
    assert np.array_equal(back.mass, d.mass)
    p = tmp_path / "law.csv"
    lattice.to_csv(d, str(p))
    back2 = lattice.from_csv(str(p))
    assert back2.offset == d.offset
    assert np.allclose(back2.mass, d.mass, rtol=0, atol=0)
    assert back2.defect == d.defect


def test_stride_scale_and_power():
    d = lattice.centered_pair_law(0.2, 1)
    s = lattice.stride_scale(d, 7)
    assert s.prob(14) == d.prob(2) and s.prob(-7) == d.prob(-1)
    p3 = lattice.power(d, 3)
    direct = lattice.convolve(lattice.convolve(d, d), d)
    assert lattice.tv_distance(p3, direct) < 1e-12
    assert lattice.power(d, 0).prob(0) == 1.0
