import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from traplab.errors import DomainError
from traplab.poverty import FgtRequest, b1_moment, fgt_empirical, fgt_from_b1, headcount


def test_empirical_hand_example():
    x = [100.0, 300.0, 421.0, 800.0]
    assert headcount(x, x_star=421.0) == pytest.approx(0.5)
    gaps = [(421 - 100) / 421, (421 - 300) / 421]
    assert fgt_empirical(x, gamma=1.0, x_star=421.0) == pytest.approx(sum(gaps) / 4, rel=1e-15)
    assert fgt_empirical(x, gamma=2.0, x_star=421.0) == pytest.approx(sum(g * g for g in gaps) / 4, rel=1e-15)


def test_weights_and_request():
    x = [100.0, 500.0]
    assert fgt_empirical(x, [3.0, 1.0], FgtRequest(0.0, 421.0)) == pytest.approx(0.75)
    with pytest.raises(DomainError):
        fgt_empirical(x, [1.0], gamma=0.0, x_star=421.0)
    with pytest.raises(DomainError):
        FgtRequest(-1.0, 1.0)


def test_zero_income_counts_fully():
    assert fgt_empirical([0.0, 1000.0], gamma=3.0, x_star=500.0) == pytest.approx(0.5)


def test_b1_moment_vs_scipy():
    for h, b, p, q in [(1, 1, 1, 3), (2.5, 3.0, 0.7, 2.2), (0.5, 421.0, 1.0, 1.25)]:
        ref = stats.beta(p, q, scale=b).moment(1) if h == 1 else integrate.quad(
            lambda w: w**h * stats.beta(p, q, scale=b).pdf(w), 0, b)[0]
        assert b1_moment(h, b, p, q) == pytest.approx(ref, rel=1e-9)


def test_fgt_from_b1_closed_forms():
    # FGT1 = H/(1+alpha), FGT2 = 2H/((1+alpha)(2+alpha))
    assert fgt_from_b1(3.0, 0.5, 1.0) == pytest.approx(0.5 / 4, rel=1e-14)
    assert fgt_from_b1(3.0, 0.5, 2.0) == pytest.approx(1.0 / 20, rel=1e-14)
    assert fgt_from_b1(3.0, 0.5, 0.0) == 0.5


def test_fgt_from_b1_published_rows():
    for alpha, H, f1, f2 in [(3.08, 0.56, 0.136, 0.054), (2.95, 0.65, 0.165, 0.067)]:
        assert abs(fgt_from_b1(alpha, H, 1.0) - f1) <= 0.003
        assert abs(fgt_from_b1(alpha, H, 2.0) - f2) <= 0.003
    assert abs(fgt_from_b1(3.61, 0.47, 1.0) - 0.102) <= 0.003


@settings(max_examples=50, deadline=None)
@given(alpha=st.floats(0.3, 8.0), gamma=st.floats(0.1, 4.0))
def test_property_b1_fgt_matches_large_sample(alpha, gamma):
    # empirical FGT of simulated B1 short-falls converges to the closed form
    rng = np.random.default_rng(int(alpha * 1000 + gamma * 10))
    y = 1.0 - (1.0 - rng.random(40000)) ** (1.0 / alpha)
    inc = 1.0 - y
    emp = fgt_empirical(inc, gamma=gamma, x_star=1.0)
    assert emp == pytest.approx(fgt_from_b1(alpha, 1.0, gamma), abs=0.02)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.0, 1000.0), min_size=1, max_size=40), st.floats(1.0, 900.0))
def test_property_fgt_monotone_in_gamma(incomes, line):
    vals = [fgt_empirical(incomes, gamma=g, x_star=line) for g in (0.0, 1.0, 2.0)]
    assert 0.0 <= vals[2] <= vals[1] + 1e-15 <= vals[0] + 2e-15 <= 1.0 + 2e-15
