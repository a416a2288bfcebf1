"""Closed-form Gerber-Shiu quantities for Beta(alpha, 1) remaining proportions.

All functions take capital ``x >= x_star`` and work with the scaled
capital ``y = x / x_star``.  ``delta`` is the force of interest used to
discount the trapping time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

from scipy import integrate

from .errors import DomainError, ParameterRegimeError
from .model import ModelParams
from .specfun import (
    DEFAULT_CONTROL,
    Hyper2F1Args,
    SeriesControl,
    beta_fn,
    d2f1_da,
    d2f1_db,
    d2f1_dc,
    gamma_ratio,
    gauss_2f1,
    gauss_2f1_dz,
)


class HyperParams(NamedTuple):
    a_h: float
    b_h: float
    c_h: float


def hyper_params(p: ModelParams, delta: float) -> HyperParams:
    """Roots a <= 0 <= b of r t^2 + (delta + lam - alpha r) t - alpha delta = 0, and c = alpha."""
    if delta < 0:
        raise DomainError(f"delta must be nonnegative, got {delta}")
    k = delta + p.lam - p.alpha * p.r
    root = math.sqrt(k * k + 4.0 * p.r * p.alpha * delta)
    if k > 0:
        # avoid cancellation in -k + root
        a_h = (-k - root) / (2.0 * p.r)
        b_h = -p.alpha * delta / (p.r * a_h) if a_h != 0 else 0.0
    else:
        b_h = (-k + root) / (2.0 * p.r)
        a_h = -p.alpha * delta / (p.r * b_h) if b_h != 0 else 0.0
    return HyperParams(a_h, b_h, p.alpha)


def _check_x(x: float, p: ModelParams) -> float:
    if not x >= p.x_star:
        raise DomainError(f"capital x={x} must be >= x_star={p.x_star}")
    return x / p.x_star


def _laplace_args(p: ModelParams, delta: float):
    a_h, b_h, c_h = hyper_params(p, delta)
    return b_h, b_h - c_h + 1.0, b_h - a_h + 1.0


def trapping_probability(x: float, p: ModelParams, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Probability psi(x) that capital ever falls below x_star.

    Without the net condition alpha > lam/r trapping is certain and 1 is
    returned.
    """
    y = _check_x(x, p)
    if not p.net_condition:
        return 1.0
    k = p.lam / p.r
    f = gauss_2f1(Hyper2F1Args(p.alpha - k, 1.0 - k, 1.0 + p.alpha - k, 1.0 / y), ctl)
    pref = gamma_ratio((p.alpha,), (p.alpha - k, k)) / (p.alpha - k)
    return pref * f * y ** (k - p.alpha)


def laplace_trapping_time(
    x: float, p: ModelParams, delta: float, ctl: SeriesControl = DEFAULT_CONTROL
) -> float:
    """E[exp(-delta tau); tau < inf], the Laplace transform of the trapping time."""
    y = _check_x(x, p)
    if delta == 0.0:
        return trapping_probability(x, p, ctl)
    a1, a2, a3 = _laplace_args(p, delta)
    num = gauss_2f1(Hyper2F1Args(a1, a2, a3, 1.0 / y), ctl)
    den = gauss_2f1(Hyper2F1Args(a1, a2, a3, 1.0), ctl)
    return p.lam * num * y ** (-a1) / ((p.lam + delta) * den)


def laplace_trapping_time_dx(
    x: float, p: ModelParams, delta: float, ctl: SeriesControl = DEFAULT_CONTROL
) -> float:
    """Derivative of :func:`laplace_trapping_time` with respect to x (x > x_star)."""
    y = _check_x(x, p)
    if y == 1.0:
        raise DomainError("derivative is only evaluated for x > x_star")
    if delta == 0.0:
        if not p.net_condition:
            return 0.0
        k = p.lam / p.r
        a1, a2, a3 = p.alpha - k, 1.0 - k, 1.0 + p.alpha - k
        scale = gamma_ratio((p.alpha,), (p.alpha - k, k)) / (p.alpha - k)
    else:
        a1, a2, a3 = _laplace_args(p, delta)
        den = gauss_2f1(Hyper2F1Args(a1, a2, a3, 1.0), ctl)
        scale = p.lam / ((p.lam + delta) * den)
    z = 1.0 / y
    f = gauss_2f1(Hyper2F1Args(a1, a2, a3, z), ctl)
    fz = gauss_2f1_dz(Hyper2F1Args(a1, a2, a3, z), ctl)
    # d/dy [F(1/y) y^{-b}] = -F'(1/y) y^{-b-2} - b F(1/y) y^{-b-1}
    dy = -fz * y ** (-a1 - 2.0) - a1 * f * y ** (-a1 - 1.0)
    return scale * dy / p.x_star


def expected_trapping_time(x: float, p: ModelParams, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """E[tau; tau < inf] from the closed form in Gamma functions and 2F1 derivatives."""
    y = _check_x(x, p)
    if not p.net_condition:
        raise ParameterRegimeError(
            f"expected trapping time requires alpha > lam/r (alpha={p.alpha}, lam/r={p.lam / p.r})"
        )
    r, lam, alpha = p.r, p.lam, p.alpha
    k = lam / r
    a1, a2, a3 = alpha - k, 1.0 - k, 1.0 + alpha - k
    z = 1.0 / y

    def derivs(zz):
        args = Hyper2F1Args(a1, a2, a3, zz)
        return d2f1_da(args, ctl), d2f1_db(args, ctl), d2f1_dc(args, ctl)

    fa1, fb1, fc1 = derivs(1.0)
    fay, fby, fcy = derivs(z)
    # 2F1(1 - k, alpha - k; ...) is symmetric in its first two parameters
    f_y = gauss_2f1(Hyper2F1Args(a2, a1, a3, z), ctl)
    g_alpha = math.gamma(alpha)
    g_k = math.gamma(k)
    g_c = math.gamma(a3)
    first = g_alpha * f_y * ((alpha * r + lam) * fc1 + lam * (fa1 + fb1))
    second = (1.0 / lam) * g_k * g_c * (
        f_y * (r * (alpha * r - lam) + lam**2 * math.log(y))
        - lam * ((alpha * r + lam) * fcy + lam * (fay + fby))
    )
    pref = g_alpha * y ** (k - alpha) / (r * (alpha * r - lam) * g_k**2 * g_c**2)
    return pref * (first + second)


def conditional_expected_trapping_time(
    x: float, p: ModelParams, ctl: SeriesControl = DEFAULT_CONTROL
) -> float:
    """E[tau | tau < inf]."""
    return expected_trapping_time(x, p, ctl) / trapping_probability(x, p, ctl)


# ---------------------------------------------------------------------------
# deficit at trapping


def _check_deficit(y: float, p: ModelParams):
    if not 0.0 <= y <= p.x_star:
        raise DomainError(f"deficit {y} outside [0, {p.x_star}]")


def deficit_cdf_conditional(y: float, p: ModelParams) -> float:
    """P(deficit <= y | trapped) = 1 - (1 - y/x_star)**alpha."""
    _check_deficit(y, p)
    return 1.0 - (1.0 - y / p.x_star) ** p.alpha


def deficit_pdf_conditional(y: float, p: ModelParams) -> float:
    """Density of the deficit at trapping given trapping, on (0, x_star)."""
    if not 0.0 < y < p.x_star:
        raise DomainError(f"deficit {y} outside (0, {p.x_star})")
    return p.alpha / p.x_star * (1.0 - y / p.x_star) ** (p.alpha - 1.0)


def deficit_cdf_discounted(
    y: float, x: float, p: ModelParams, delta: float, ctl: SeriesControl = DEFAULT_CONTROL
) -> float:
    """E[1{deficit <= y} exp(-delta tau); tau < inf]."""
    _check_deficit(y, p)
    return laplace_trapping_time(x, p, delta, ctl) * deficit_cdf_conditional(y, p)


def deficit_pdf_discounted(
    y: float, x: float, p: ModelParams, delta: float, ctl: SeriesControl = DEFAULT_CONTROL
) -> float:
    return laplace_trapping_time(x, p, delta, ctl) * deficit_pdf_conditional(y, p)


class DeficitMoment(NamedTuple):
    raw: float
    conditional: float


def deficit_moment(
    h: float, x: float, p: ModelParams, delta: float = 0.0, ctl: SeriesControl = DEFAULT_CONTROL
) -> DeficitMoment:
    """h-th moment of the deficit at trapping.

    ``raw`` is E[deficit^h exp(-delta tau); tau < inf]; ``conditional`` is
    E[deficit^h | tau < inf], which is free of x and delta.
    """
    if not h > 0:
        raise DomainError(f"moment order must be positive, got {h}")
    cond = p.alpha * p.x_star**h * beta_fn(p.alpha, h + 1.0)
    return DeficitMoment(cond * laplace_trapping_time(x, p, delta, ctl), cond)


# ---------------------------------------------------------------------------
# integro-differential equation check


@dataclass(frozen=True)
class PenaltySpec:
    """Penalty applied to the deficit at trapping.

    kind ``"unit"``: w = 1; ``"indicator"``: w = 1{deficit <= level};
    ``"power"``: w = deficit**level.
    """

    kind: str = "unit"
    level: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("unit", "indicator", "power"):
            raise DomainError(f"unknown penalty kind {self.kind!r}")
        if self.kind != "unit" and self.level is None:
            raise DomainError(f"penalty {self.kind!r} needs a level")

    def expected_at_jump(self, x: float, p: ModelParams) -> float:
        """Expected penalty from a jump out of capital x that traps."""
        y = x / p.x_star
        if self.kind == "unit":
            return y ** (-p.alpha)
        if self.kind == "indicator":
            return y ** (-p.alpha) - ((p.x_star - self.level) / x) ** p.alpha
        h = self.level
        return p.alpha * p.x_star**h * beta_fn(p.alpha, h + 1.0) * y ** (-p.alpha)

    def scale(self, p: ModelParams) -> float:
        """Factor turning the Laplace transform into this penalty's Gerber-Shiu function."""
        if self.kind == "unit":
            return 1.0
        if self.kind == "indicator":
            return 1.0 - (1.0 - self.level / p.x_star) ** p.alpha
        h = self.level
        return p.alpha * p.x_star**h * beta_fn(p.alpha, h + 1.0)


def ide_residual(
    m: Callable[[float], float],
    m_prime: Callable[[float], float],
    x: float,
    p: ModelParams,
    delta: float,
    penalty: PenaltySpec = PenaltySpec(),
    abs_tol: float = 1e-10,
) -> float:
    """Signed residual of the Gerber-Shiu integro-differential equation at x.

    r (x - x*) m'(x) - (delta + lam) m(x)
        + lam * int_{x*/x}^1 m(x z) alpha z^(alpha-1) dz + lam A(x)
    """
    _check_x(x, p)
    lower = p.x_star / x
    if lower < 1.0:
        integral, _ = integrate.quad(
            lambda z: m(x * z) * p.alpha * z ** (p.alpha - 1.0),
            lower,
            1.0,
            epsabs=abs_tol,
            epsrel=abs_tol,
            limit=200,
        )
    else:
        integral = 0.0
    drift = p.r * (x - p.x_star) * m_prime(x) if x > p.x_star else 0.0
    return (
        drift
        - (delta + p.lam) * m(x)
        + p.lam * integral
        + p.lam * penalty.expected_at_jump(x, p)
    )


def gerber_shiu(
    x: float, p: ModelParams, delta: float, penalty: PenaltySpec = PenaltySpec(),
    ctl: SeriesControl = DEFAULT_CONTROL,
) -> float:
    """Closed-form Gerber-Shiu function for one of the supported penalties."""
    return penalty.scale(p) * laplace_trapping_time(x, p, delta, ctl)


def gerber_shiu_dx(
    x: float, p: ModelParams, delta: float, penalty: PenaltySpec = PenaltySpec(),
    ctl: SeriesControl = DEFAULT_CONTROL,
) -> float:
    return penalty.scale(p) * laplace_trapping_time_dx(x, p, delta, ctl)
