"""Special functions used by the closed forms.

Gauss 2F1 is summed directly from its power series on ``0 <= z < 1`` and
taken from the Gauss summation theorem at ``z = 1``.  Parameter derivatives
of 2F1 are expressed through a Kampe de Feriet double series of type
F^{2,2,1}_{2,1,0}, summed along anti-diagonals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import special

from .errors import ConvergenceError, DivergenceError, DomainError

__all__ = [
    "SeriesControl",
    "Hyper2F1Args",
    "DEFAULT_CONTROL",
    "ln_gamma",
    "ln_gamma_signed",
    "gamma_ratio",
    "beta_fn",
    "pochhammer_ln",
    "gauss_2f1",
    "gauss_2f1_dz",
    "hyp2f1",
    "kdf_f221",
    "d2f1_da",
    "d2f1_db",
    "d2f1_dc",
]

# distance to the nearest nonpositive integer below which a parameter is a pole
POLE_TOL = 1e-9


@dataclass(frozen=True)
class SeriesControl:
    rel_tol: float = 1e-12
    max_terms: int = 100_000

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise DomainError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.max_terms < 1:
            raise DomainError(f"max_terms must be >= 1, got {self.max_terms}")


DEFAULT_CONTROL = SeriesControl()


def is_nonpositive_integer(v: float, tol: float = POLE_TOL) -> bool:
    return v <= tol and abs(v - round(v)) <= tol


@dataclass(frozen=True)
class Hyper2F1Args:
    """Arguments of 2F1(a, b; c; z) restricted to 0 <= z <= 1."""

    a: float
    b: float
    c: float
    z: float

    def __post_init__(self):
        if is_nonpositive_integer(self.c):
            raise DomainError(f"c={self.c} is a pole of 2F1")
        if not 0.0 <= self.z <= 1.0:
            raise DomainError(f"z={self.z} outside [0, 1]")


# ---------------------------------------------------------------------------
# Gamma family


def ln_gamma(x: float) -> float:
    """Natural log of Gamma(x) for x > 0."""
    if not x > 0:
        raise DomainError(f"ln_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def ln_gamma_signed(x: float) -> tuple[int, float]:
    """Return ``(sign, log|Gamma(x)|)`` for any real x that is not a pole."""
    if x > 0:
        return 1, math.lgamma(x)
    if is_nonpositive_integer(x, 0.0) or x == round(x):
        raise DomainError(f"Gamma has a pole at {x}")
    # reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
    s = math.sin(math.pi * x)
    sign = 1 if s > 0 else -1
    return sign, math.log(math.pi) - math.log(abs(s)) - math.lgamma(1.0 - x)


def gamma_ratio(num, den) -> float:
    """prod Gamma(num) / prod Gamma(den), evaluated in log space."""
    sign = 1
    total = 0.0
    for v in num:
        s, lg = ln_gamma_signed(v)
        sign *= s
        total += lg
    for v in den:
        s, lg = ln_gamma_signed(v)
        sign *= s
        total -= lg
    return sign * math.exp(total)


def beta_fn(p: float, q: float) -> float:
    """Euler Beta function B(p, q) for positive arguments."""
    if not (p > 0 and q > 0):
        raise DomainError(f"beta_fn requires p, q > 0, got ({p}, {q})")
    return math.exp(math.lgamma(p) + math.lgamma(q) - math.lgamma(p + q))


class SignedLog(NamedTuple):
    sign: int
    log_abs: float


def pochhammer_ln(a: float, n: int) -> SignedLog:
    """Sign and log-magnitude of the rising factorial (a)_n.

    A vanishing product is reported as ``(0, -inf)``.
    """
    if n < 0 or int(n) != n:
        raise DomainError(f"n must be a nonnegative integer, got {n}")
    n = int(n)
    if n == 0:
        return SignedLog(1, 0.0)
    if a == round(a) and a <= 0:
        m = int(-a)
        if n > m:
            return SignedLog(0, -math.inf)
        # (a)_n = (-1)^n m! / (m - n)!
        sign = -1 if n % 2 else 1
        return SignedLog(sign, math.lgamma(m + 1) - math.lgamma(m - n + 1))
    s1, l1 = ln_gamma_signed(a + n)
    s0, l0 = ln_gamma_signed(a)
    return SignedLog(s1 * s0, l1 - l0)


# ---------------------------------------------------------------------------
# series machinery


def _first_converged(terms, partial, rel_tol, prev_term, prev_small):
    """Index of the first term after which the series may be truncated.

    A term qualifies when it and its predecessor are both below
    ``rel_tol * |partial sum|`` and a geometric tail bound built from the
    local term ratio is below the same threshold.
    """
    mag = np.abs(terms)
    ref = rel_tol * np.abs(partial)
    prev = np.concatenate(([abs(prev_term)], mag[:-1]))
    with np.errstate(divide="ignore", invalid="ignore"):
        rho = np.where(prev > 0, mag / prev, np.where(mag > 0, np.inf, 0.0))
        tail = np.where(rho < 1, mag * rho / (1.0 - rho), np.inf)
    small = (mag <= ref) & (tail <= ref)
    ok = small & np.concatenate(([prev_small], small[:-1]))
    hits = np.flatnonzero(ok)
    return (int(hits[0]) if hits.size else None), bool(small[-1])


def _hyp2f1_series(a, b, c, z, ctl):
    if z == 0.0:
        return 1.0
    total = 1.0
    term = 1.0
    prev_small = False
    n0 = 0
    chunk = 256
    while n0 < ctl.max_terms:
        m = min(chunk, ctl.max_terms - n0)
        n = np.arange(n0, n0 + m, dtype=float)
        ratios = (a + n) * (b + n) * z / ((c + n) * (n + 1.0))
        terms = term * np.cumprod(ratios)
        partial = total + np.cumsum(terms)
        hit, prev_small = _first_converged(terms, partial, ctl.rel_tol, term, prev_small)
        if hit is not None:
            return float(partial[hit])
        total = float(partial[-1])
        term = float(terms[-1])
        n0 += m
        chunk = min(2 * chunk, 16384)
    raise ConvergenceError(
        f"2F1({a}, {b}; {c}; {z}) did not converge in {ctl.max_terms} terms"
    )


def _hyp2f1_unit(a, b, c):
    s = c - a - b
    if not s > 0:
        raise DivergenceError(f"2F1({a}, {b}; {c}; 1) diverges: c - a - b = {s} <= 0")
    if is_nonpositive_integer(c - a, 0.0) or is_nonpositive_integer(c - b, 0.0):
        return 0.0
    return gamma_ratio((c, s), (c - a, c - b))


# above this z the series in (1 - z) replaces the direct series
NEAR_ONE = 0.9
# c - a - b closer than this to an integer is treated by interpolation in c
INTEGER_GAP = 1e-3


def _gamma_ratio_or_zero(num, den):
    if any(is_nonpositive_integer(v, 0.0) for v in den):
        return 0.0
    return gamma_ratio(num, den)


def _hyp2f1_connection(a, b, c, z, ctl):
    """2F1 on (0, 1) from the two series in 1 - z; c - a - b must not be an integer."""
    s = c - a - b
    w = 1.0 - z
    left = _gamma_ratio_or_zero((c, s), (c - a, c - b))
    right = _gamma_ratio_or_zero((c, -s), (a, b))
    total = 0.0
    if left != 0.0:
        total += left * _hyp2f1_series(a, b, 1.0 - s, w, ctl)
    if right != 0.0:
        total += right * w**s * _hyp2f1_series(c - a, c - b, 1.0 + s, w, ctl)
    return total


def _hyp2f1_near_one(a, b, c, z, ctl):
    s = c - a - b
    gap = s - round(s)
    if abs(gap) >= INTEGER_GAP:
        return _hyp2f1_connection(a, b, c, z, ctl)
    # Lagrange interpolation in c across the removable singularity
    c0 = c - gap
    h = 2.0 * INTEGER_GAP
    nodes = (-3.0, -2.0, -1.0, 1.0, 2.0, 3.0)
    t = gap / h
    total = 0.0
    for i, ni in enumerate(nodes):
        weight = 1.0
        for j, nj in enumerate(nodes):
            if j != i:
                weight *= (t - nj) / (ni - nj)
        total += weight * _hyp2f1_connection(a, b, c0 + ni * h, z, ctl)
    return total


def gauss_2f1(args: Hyper2F1Args, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Gauss hypergeometric function 2F1(a, b; c; z) for 0 <= z <= 1.

    For z > 0.9 the function is rebuilt from the connection formula in
    1 - z, where the direct power series would need far too many terms.
    """
    a, b, c, z = args.a, args.b, args.c, args.z
    if z == 1.0:
        return _hyp2f1_unit(a, b, c)
    if z > NEAR_ONE and not _terminates(a, b):
        return _hyp2f1_near_one(a, b, c, z, ctl)
    return _hyp2f1_series(a, b, c, z, ctl)


def _terminates(a, b):
    return is_nonpositive_integer(a, 0.0) or is_nonpositive_integer(b, 0.0)


def hyp2f1(a: float, b: float, c: float, z: float, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Positional shorthand for :func:`gauss_2f1`."""
    return gauss_2f1(Hyper2F1Args(a, b, c, z), ctl)


def gauss_2f1_dz(args: Hyper2F1Args, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """d/dz 2F1(a, b; c; z) = (ab/c) 2F1(a+1, b+1; c+1; z), for z < 1."""
    a, b, c, z = args.a, args.b, args.c, args.z
    if z == 1.0:
        raise DomainError("derivative in z is not evaluated at z = 1")
    if a == 0.0 or b == 0.0:
        return 0.0
    return a * b / c * gauss_2f1(Hyper2F1Args(a + 1.0, b + 1.0, c + 1.0, z), ctl)


# ---------------------------------------------------------------------------
# Kampe de Feriet function


def _rising_prefix(num, den, scale, k_max):
    """Array of prod_{j<k} [prod(num+j) * scale / prod(den+j)] for k < k_max."""
    j = np.arange(k_max - 1, dtype=float)
    ratio = np.full(k_max - 1, float(scale))
    for v in num:
        ratio *= v + j
    for v in den:
        ratio /= v + j
    out = np.empty(k_max)
    out[0] = 1.0
    out[1:] = np.cumprod(ratio)
    return out


def kdf_f221(
    a1, a2, b1, b2, d1, r1, r2, s1, x, y, ctl: SeriesControl = DEFAULT_CONTROL
) -> float:
    """Kampe de Feriet function F^{2,2,1}_{2,1,0} with no (u) parameters.

    sum_{m,n} (a1)_{m+n}(a2)_{m+n}(b1)_m(b2)_m(d1)_n
              / [(r1)_{m+n}(r2)_{m+n}(s1)_m] * x^m/m! * y^n/n!

    The double sum is accumulated along anti-diagonals m + n = k; the
    anti-diagonal block sums are a discrete convolution of the m- and
    n-dependent factors.
    """
    for name, v in (("r1", r1), ("r2", r2), ("s1", s1)):
        if is_nonpositive_integer(v):
            raise DomainError(f"denominator parameter {name}={v} is a pole")
    if x == 0.0 and y == 0.0:
        return 1.0
    k_max = 128
    while True:
        k_max = min(k_max, ctl.max_terms)
        diag = _rising_prefix((a1, a2), (r1, r2), 1.0, k_max)
        em = _rising_prefix((b1, b2), (s1, 1.0), x, k_max)
        gn = _rising_prefix((d1,), (1.0,), y, k_max)
        blocks = diag * np.convolve(em, gn)[:k_max]
        partial = np.cumsum(blocks)
        hit, _ = _first_converged(blocks, partial, ctl.rel_tol, np.inf, False)
        if hit is not None:
            return float(partial[hit])
        if k_max >= ctl.max_terms:
            raise ConvergenceError(
                f"Kampe de Feriet series did not converge in {ctl.max_terms} anti-diagonals"
            )
        k_max *= 2


# ---------------------------------------------------------------------------
# parameter derivatives of 2F1


def _drgamma(x):
    """d/dx 1/Gamma(x), finite everywhere including the poles of Gamma."""
    if is_nonpositive_integer(x, 0.0):
        n = int(round(-x))
        return (-1.0) ** n * math.factorial(n)
    return -special.digamma(x) * special.rgamma(x)


def _d2f1_unit(a, b, c, which):
    """Parameter derivative of 2F1(a, b; c; 1) from the Gauss summation theorem."""
    s = c - a - b
    if not s > 0:
        raise DivergenceError(f"2F1({a}, {b}; {c}; 1) diverges: c - a - b = {s} <= 0")
    ca, cb = c - a, c - b
    if not (is_nonpositive_integer(ca, 0.0) or is_nonpositive_integer(cb, 0.0)):
        value = gamma_ratio((c, s), (ca, cb))
        psi_s = special.digamma(s)
        if which == "a":
            return value * (special.digamma(ca) - psi_s)
        if which == "b":
            return value * (special.digamma(cb) - psi_s)
        return value * (special.digamma(c) + psi_s - special.digamma(ca) - special.digamma(cb))
    # one of 1/Gamma(c-a), 1/Gamma(c-b) vanishes; differentiate the product directly
    g_c, g_s = special.gamma(c), special.gamma(s)
    ra, rb = special.rgamma(ca), special.rgamma(cb)
    da, db = _drgamma(ca), _drgamma(cb)
    psi_s = special.digamma(s)
    if which == "a":
        return g_c * g_s * (-psi_s * ra * rb - da * rb)
    if which == "b":
        return g_c * g_s * (-psi_s * ra * rb - ra * db)
    return g_c * g_s * (
        special.digamma(c) * ra * rb + psi_s * ra * rb + da * rb + ra * db
    )


def _d2f1_termwise(a, b, c, z, which, ctl):
    """Term-by-term differentiated series via the product rule.

    Used where the Kampe de Feriet representation has a denominator pole
    (a or b a negative integer); the recurrence never divides by a
    rising factorial, so vanishing factors are handled exactly.
    """
    t = 1.0
    u = 0.0
    total = 0.0
    prev_small = False
    for n in range(ctl.max_terms):
        g = z / ((c + n) * (n + 1.0))
        if which == "a":
            u_next = (u * (a + n) + t) * (b + n) * g
        elif which == "b":
            u_next = (u * (b + n) + t) * (a + n) * g
        else:
            u_next = (u - t / (c + n)) * (a + n) * (b + n) * g
        t = t * (a + n) * (b + n) * g
        total += u_next
        small = abs(u_next) <= ctl.rel_tol * abs(total) and abs(t) <= ctl.rel_tol * max(abs(total), 1.0)
        if small and prev_small and abs(u_next) <= abs(u) * 0.999:
            return total
        prev_small = small
        u = u_next
        if t == 0.0 and u == 0.0:
            return total
    raise ConvergenceError(f"differentiated 2F1 series did not converge in {ctl.max_terms} terms")


def d2f1_da(args: Hyper2F1Args, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Partial derivative of 2F1(a, b; c; z) with respect to a.

    For z < 1 this is (zb/c) F^{2,2,1}_{2,1,0}(a+1, b+1; 1, a; 1; 2, c+1; a+1;; z, z);
    at z = 1 the derivative of the Gauss summation formula is used.
    """
    a, b, c, z = args.a, args.b, args.c, args.z
    if z == 1.0:
        return _d2f1_unit(a, b, c, "a")
    if b == 0.0 or z == 0.0:
        return 0.0
    if is_nonpositive_integer(a + 1.0):
        return _d2f1_termwise(a, b, c, z, "a", ctl)
    return z * b / c * kdf_f221(a + 1.0, b + 1.0, 1.0, a, 1.0, 2.0, c + 1.0, a + 1.0, z, z, ctl)


def d2f1_db(args: Hyper2F1Args, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Partial derivative of 2F1(a, b; c; z) with respect to b."""
    a, b, c, z = args.a, args.b, args.c, args.z
    if z == 1.0:
        return _d2f1_unit(a, b, c, "b")
    if a == 0.0 or z == 0.0:
        return 0.0
    if is_nonpositive_integer(b + 1.0):
        return _d2f1_termwise(a, b, c, z, "b", ctl)
    return z * a / c * kdf_f221(a + 1.0, b + 1.0, 1.0, b, 1.0, 2.0, c + 1.0, b + 1.0, z, z, ctl)


def d2f1_dc(args: Hyper2F1Args, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Partial derivative of 2F1(a, b; c; z) with respect to c."""
    a, b, c, z = args.a, args.b, args.c, args.z
    if z == 1.0:
        return _d2f1_unit(a, b, c, "c")
    if a == 0.0 or b == 0.0 or z == 0.0:
        return 0.0
    return -z * a * b / c**2 * kdf_f221(
        a + 1.0, b + 1.0, 1.0, c, 1.0, 2.0, c + 1.0, c + 1.0, z, z, ctl
    )
