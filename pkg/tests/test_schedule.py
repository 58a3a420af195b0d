"""Parameter family and index bookkeeping."""

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cocyclelab import schedule


def test_params_examples():
    assert schedule.params(2) == (4, 16, Fraction(1, 32))
    assert schedule.params(1) == (3, 2, Fraction(1, 4))
    p, d, a2 = schedule.params(3)
    assert (p, d) == (9, 512)
    assert a2 == pytest.approx(0.0025964, abs=5e-8)


def test_params_guards():
    with pytest.raises(schedule.ParameterRangeError):
        schedule.params(0)
    with pytest.raises(schedule.ParameterRangeError):
        schedule.d_value(65)


def test_schedule_monotone():
    for k in range(1, 40):
        assert schedule.p_value(k) < schedule.p_value(k + 1)
        assert schedule.d_value(k) < schedule.d_value(k + 1)
        if k >= 2:
            assert schedule.p_value(k) < schedule.d_value(k)


def test_alpha_normalization_exact():
    # p_k^2 alpha_k^2 k log2(k) = 1 for k >= 2
    for k in range(2, 30):
        val = schedule.p_value(k) ** 2 * float(schedule.alpha_sq(k)) * k * math.log2(k)
        assert val == pytest.approx(1.0, rel=1e-12)


def test_index_sets_examples():
    s = schedule.index_sets(10, 6)
    assert s.small == {1} and s.medium == {2, 3} and s.i_hat == {2}
    s17 = schedule.index_sets(17, 6)
    assert s17.i_hat == frozenset()
    assert schedule.p_value(3) == 9 and schedule.p_value(5) == 33
    s5 = schedule.index_sets(5, 6)
    assert s5.i_full == {2} and s5.i_hat == frozenset()
    assert s5.i_full - s5.i_hat == {int(math.log2(4))}


def test_index_sets_partition():
    for n in (2, 3, 4, 5, 9, 16, 17, 100, 513, 65536):
        s = schedule.index_sets(n, 20)
        union = s.small | s.medium | s.large_truncated
        assert union == set(range(1, 21))
        assert not (s.small & s.medium) and not (s.small & s.large_truncated)
        assert not (s.medium & s.large_truncated)
        assert 1 not in s.medium  # p_1 = 3 > d_1 = 2


def test_i_hat_subset_scan():
    # coarse grid plus all n near powers of two, up to 10^6
    ns = set(range(2, 2000))
    ns.update(range(2, 10 ** 6, 9973))
    for e in range(2, 20):
        ns.update(range(max(2, 2 ** e - 3), 2 ** e + 4))
    for n in sorted(ns):
        s = schedule.index_sets(n, 22)
        assert s.i_hat <= s.i_full
        assert len(s.i_full - s.i_hat) <= 1


def test_trapezoid_examples():
    assert schedule.trapezoid_weight(4, 3, 2) == 2
    assert [schedule.trapezoid_weight(j, 3, 2) for j in range(6)] == [1, 2, 3, 3, 2, 1]
    assert schedule.trapezoid_weight(0, 1, 2) == 1
    assert schedule.trapezoid_weight(6, 3, 2) == 0


@given(n=st.integers(1, 300), k=st.integers(1, 8))
@settings(max_examples=80, deadline=None)
def test_trapezoid_total_mass(n, k):
    p = schedule.p_value(k)
    total = sum(schedule.trapezoid_weight(j, n, k) for j in range(n + p))
    assert total == n * p


def test_net_profile_examples():
    runs = schedule.net_weight_profile(3, 1)
    dense = {}
    for start, length, value in runs:
        for j in range(start, start + length):
            dense[j] = value
    assert [dense.get(j, 0) for j in range(7)] == [1, 2, 2, 0, -2, -2, -1]
    runs2 = schedule.net_weight_profile(2, 2)
    dense2 = {}
    for start, length, value in runs2:
        for j in range(start, start + length):
            dense2[j] = value
    assert [dense2.get(j, 0) for j in range(5)] == [1, 2, 2, 2, 1]
    assert [dense2.get(16 + j, 0) for j in range(5)] == [-1, -2, -2, -2, -1]


@given(n=st.integers(1, 200), k=st.integers(1, 7))
@settings(max_examples=80, deadline=None)
def test_net_profile_mass_cancels(n, k):
    runs = schedule.net_weight_profile(n, k)
    assert sum(length * value for _, length, value in runs) == 0
    # runs agree with the definitional weight difference
    d = schedule.d_value(k)
    dense = {}
    for start, length, value in runs:
        for j in range(start, start + length):
            dense[j] = value
    for j in range(n + schedule.p_value(k) + min(d, 1 << 12)):
        expect = schedule.trapezoid_weight(j, n, k) - schedule.trapezoid_weight(j - d, n, k)
        assert dense.get(j, 0) == expect


def test_truncation_examples():
    k, bound = schedule.truncation_level(10 ** 6, 0.01)
    assert k == 42 and bound <= 0.01
    assert schedule.truncation_level(2, 10 ** 6)[0] == 1


def test_truncation_dominates_direct_sum():
    for t, tol in ((1000, 0.01), (10 ** 5, 0.5), (4096, 0.001)):
        k, bound = schedule.truncation_level(t, tol)
        direct = sum(4.0 * t * t / (schedule.p_value(j) * j * math.log2(j))
                     for j in range(k + 1, k + 31))
        assert bound >= direct
        assert k >= math.ceil(math.log2(t))


def test_truncation_unreachable():
    with pytest.raises(schedule.ParameterRangeError):
        schedule.truncation_level(2 ** 50, 1e-30)
