import math

import mpmath as mp
import numpy as np
import pytest
from scipy import integrate

from traplab.errors import DomainError, ParameterRegimeError
from traplab.gerbershiu import (
    PenaltySpec,
    conditional_expected_trapping_time,
    deficit_cdf_conditional,
    deficit_cdf_discounted,
    deficit_moment,
    deficit_pdf_conditional,
    expected_trapping_time,
    gerber_shiu,
    gerber_shiu_dx,
    hyper_params,
    ide_residual,
    laplace_trapping_time,
    laplace_trapping_time_dx,
    trapping_probability,
)
from traplab.model import ModelParams
from traplab.poverty import fgt_from_b1
from oracles import TIGHT, laplace_mp, richardson_dm_ddelta


def psi_mp(x, p):
    # independent evaluation of the trapping probability at high precision
    k = mp.mpf(p.lam) / p.r
    a = mp.mpf(p.alpha)
    y = mp.mpf(x) / p.x_star
    return mp.gamma(a) * mp.hyp2f1(a - k, 1 - k, 1 + a - k, 1 / y) * y ** (k - a) / (
        (a - k) * mp.gamma(a - k) * mp.gamma(k)
    )


def test_hyper_params_roots():
    p = ModelParams(0.5, 1.0, 3.0, 1.0)
    hp = hyper_params(p, 0.1)
    for t in (hp.a_h, hp.b_h):
        assert p.r * t * t + (0.1 + p.lam - p.alpha * p.r) * t - p.alpha * 0.1 == pytest.approx(0, abs=1e-13)
    assert hp.a_h <= 0 <= hp.b_h


def test_psi_vs_mpmath():
    for p in [ModelParams(1, 1, 1.25, 1), ModelParams(0.5, 1, 3, 2), ModelParams(0.2, 0.7, 4, 1)]:
        for y in (1.0, 1.3, 2.0, 7.0):
            x = y * p.x_star
            assert trapping_probability(x, p) == pytest.approx(float(psi_mp(x, p)), rel=1e-10)


def test_psi_regime_and_monotone():
    p = ModelParams(1, 1, 0.9, 1)
    assert trapping_probability(3.0, p) == 1.0
    q = ModelParams(1, 1, 2.0, 1)
    vals = [trapping_probability(x, q) for x in np.linspace(1, 10, 20)]
    assert all(u > v for u, v in zip(vals, vals[1:]))
    assert all(0 < v <= 1 + 1e-12 for v in vals)


def test_boundary_values(fig1_params):
    assert trapping_probability(1.0, fig1_params) == pytest.approx(1.0, abs=1e-10)
    assert laplace_trapping_time(1.0, fig1_params, 0.125) == pytest.approx(8 / 9, abs=1e-12)


def test_laplace_vs_extended_precision():
    for p in [ModelParams(1, 1, 1.25, 1), ModelParams(0.4, 1.5, 5.0, 2.0)]:
        for x in (1.0, 1.2, 3.0, 9.0):
            for d in (1 / 128, 0.125, 1.0):
                assert laplace_trapping_time(x * p.x_star, p, d) == pytest.approx(laplace_mp(x * p.x_star, p, d), rel=1e-10)


def test_laplace_limits(fig1_params):
    x = 1.7
    assert laplace_trapping_time(x, fig1_params, 1e-9) == pytest.approx(trapping_probability(x, fig1_params), rel=1e-7)
    v = [laplace_trapping_time(x, fig1_params, d) for d in (0.0, 0.1, 0.5, 2.0)]
    assert all(u > w for u, w in zip(v, v[1:]))


def test_below_xstar_rejected(fig1_params):
    with pytest.raises(DomainError):
        laplace_trapping_time(0.5, fig1_params, 0.1)


def test_dx_matches_finite_difference(fig1_params):
    for d in (0.0, 0.125):
        x, h = 2.3, 1e-5
        fd = (laplace_trapping_time(x + h, fig1_params, d, TIGHT) - laplace_trapping_time(x - h, fig1_params, d, TIGHT)) / (2 * h)
        assert laplace_trapping_time_dx(x, fig1_params, d) == pytest.approx(fd, rel=1e-7)


@pytest.mark.parametrize("delta", [0.0, 1 / 128, 1 / 8])
@pytest.mark.parametrize("penalty", [PenaltySpec(), PenaltySpec("indicator", 0.4), PenaltySpec("power", 2.0)])
def test_ide_residual(delta, penalty):
    p = ModelParams(0.6, 1.2, 2.5, 1.0)
    m = lambda x: gerber_shiu(x, p, delta, penalty)
    mp_ = lambda x: gerber_shiu_dx(x, p, delta, penalty)
    for x in (1.1, 2.0, 5.0):
        assert abs(ide_residual(m, mp_, x, p, delta, penalty)) <= 1e-8


def test_ide_residual_detects_wrong_function():
    p = ModelParams(1, 1, 2, 1)
    wrong = lambda x: 0.9 * laplace_trapping_time(x, p, 0.1)
    wrong_dx = lambda x: 0.9 * laplace_trapping_time_dx(x, p, 0.1)
    assert abs(ide_residual(wrong, wrong_dx, 2.0, p, 0.1)) > 1e-3


@pytest.mark.parametrize("pars,x", [((1, 1, 1.25, 1), 1.5), ((0.5, 1, 3, 1), 2.0), ((0.3, 0.6, 2.5, 2), 5.0), ((0.05, 0.5, 11, 1), 3.0)])
def test_expected_time_vs_richardson(pars, x):
    p = ModelParams(*pars)
    assert expected_trapping_time(x, p) == pytest.approx(richardson_dm_ddelta(x, p), rel=1e-5)


def test_expected_time_at_boundary(fig1_params):
    assert expected_trapping_time(1.0, fig1_params) == pytest.approx(1.0, rel=1e-12)


def test_expected_time_regime():
    with pytest.raises(ParameterRegimeError):
        expected_trapping_time(2.0, ModelParams(1, 1, 0.8, 1))


def test_conditional_expected_time(fig1_params):
    x = 2.5
    assert conditional_expected_trapping_time(x, fig1_params) == pytest.approx(
        expected_trapping_time(x, fig1_params) / trapping_probability(x, fig1_params), rel=1e-14
    )


def test_deficit_law(fig1_params):
    assert deficit_cdf_conditional(0.0, fig1_params) == 0.0
    assert deficit_cdf_conditional(1.0, fig1_params) == 1.0
    q, _ = integrate.quad(lambda y: deficit_pdf_conditional(y, fig1_params), 0, 0.6)
    assert q == pytest.approx(deficit_cdf_conditional(0.6, fig1_params), rel=1e-10)
    assert deficit_cdf_discounted(1.0, 2.0, fig1_params, 0.1) == pytest.approx(
        laplace_trapping_time(2.0, fig1_params, 0.1), rel=1e-14
    )
    with pytest.raises(DomainError):
        deficit_cdf_conditional(1.5, fig1_params)


@pytest.mark.parametrize("alpha", [1.25, 3.37])
@pytest.mark.parametrize("h", [1.0, 2.0, 3.0, 0.5])
def test_deficit_moment_quadrature(alpha, h):
    p = ModelParams(1.0, 1.0, alpha, 1.0)
    q, _ = integrate.quad(lambda y: y**h * deficit_pdf_conditional(y, p), 0, 1, epsabs=1e-13, epsrel=1e-13)
    assert deficit_moment(h, 2.0, p).conditional == pytest.approx(q, abs=1e-9)


def test_deficit_moment_examples():
    p = ModelParams(1.0, 1.0, 3.0, 1.0)
    assert deficit_moment(1.0, 2.0, p).conditional == pytest.approx(0.25, rel=1e-14)
    dm = deficit_moment(2.0, 2.0, p, 0.1)
    assert dm.raw == pytest.approx(dm.conditional * laplace_trapping_time(2.0, p, 0.1), rel=1e-14)


@pytest.mark.parametrize("alpha,gamma", [(1.25, 1.0), (3.37, 2.0), (2.0, 0.5)])
def test_fgt_moment_cross_identity(alpha, gamma):
    p = ModelParams(1.0, 1.0, alpha, 1.0)
    H = 0.4
    via_moment = H * deficit_moment(gamma, 1.0, p).conditional
    assert fgt_from_b1(alpha, H, gamma) == pytest.approx(via_moment, rel=1e-12)
