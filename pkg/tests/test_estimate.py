import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import optimize

from traplab.errors import DegenerateSampleError, DomainError
from traplab.estimate import (
    FitReport,
    ShortfallSample,
    fit,
    fit_groups,
    loglik,
    loglik_slope,
    mle_alpha,
    mme_alpha,
    sample_b1,
)


def test_hand_examples():
    s = ShortfallSample([0.5, 0.5], 1.0)
    assert mle_alpha(s) == pytest.approx(1 / math.log(2), rel=1e-14)
    assert mme_alpha(s) == pytest.approx(1.0)


def test_mle_is_numerical_argmax(rng):
    s = ShortfallSample(sample_b1(2.5, 300, rng, 421.0), 421.0)
    res = optimize.minimize_scalar(lambda a: -loglik(a, s), bounds=(0.05, 50), method="bounded",
                                   options={"xatol": 1e-10})
    assert mle_alpha(s) == pytest.approx(res.x, rel=1e-6)
    assert loglik_slope(mle_alpha(s), s) == pytest.approx(0.0, abs=1e-9)


def test_scale_invariance(rng):
    y = sample_b1(3.0, 200, rng)
    a = ShortfallSample(y, 1.0)
    b = ShortfallSample(y * 153530.0, 153530.0)
    assert mle_alpha(a) == pytest.approx(mle_alpha(b), rel=1e-12)
    assert mme_alpha(a) == pytest.approx(mme_alpha(b), rel=1e-12)


def test_boundary_clip():
    s = ShortfallSample.from_shortfalls([0.2, 1.0], 1.0)
    assert s.n_clipped == 1 and s.y.max() < 1.0
    rep = fit(s, min_size=30)
    assert math.isfinite(rep.alpha_mle)
    assert "n<30" in rep.flags and "clipped=1" in rep.flags


def test_degenerate_inputs():
    with pytest.raises(DegenerateSampleError):
        mle_alpha(ShortfallSample([], 1.0))
    with pytest.raises(DomainError):
        ShortfallSample([-0.1], 1.0)
    with pytest.raises(DomainError):
        ShortfallSample([0.1], 0.0)


def test_fit_report_roundtrip(rng):
    rep = fit(ShortfallSample(sample_b1(2.0, 50, rng), 1.0))
    assert FitReport.from_dict(rep.to_dict()) == rep
    groups = fit_groups({"a": ShortfallSample(sample_b1(2.0, 40, rng), 1.0), "b": ShortfallSample([], 1.0)})
    assert groups["b"] is None and groups["a"].n == 40


def test_consistency_large_sample(rng):
    s = ShortfallSample(sample_b1(3.37, 50000, rng), 1.0)
    assert mle_alpha(s) == pytest.approx(3.37, abs=0.06)
    assert mme_alpha(s) == pytest.approx(3.37, abs=0.06)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(1e-6, 1.0 - 1e-6), min_size=2, max_size=50))
def test_property_estimates_positive_and_slope_zero(y):
    s = ShortfallSample(y, 1.0)
    a = mle_alpha(s)
    assert a > 0 and mme_alpha(s) > 0
    assert abs(loglik_slope(a, s)) <= 1e-9 * s.n / a
