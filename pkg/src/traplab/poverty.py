"""Foster-Greer-Thorbecke poverty indices, empirical and from the B1 short-fall model."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .specfun import beta_fn

# policy recorded alongside results: incomes equal to the line are not poor
TIE_POLICY = "strictly_below"


@dataclass(frozen=True)
class FgtRequest:
    gamma: float
    x_star: float

    def __post_init__(self):
        if not self.gamma >= 0:
            raise DomainError(f"gamma must be >= 0, got {self.gamma}")
        if not self.x_star > 0:
            raise DomainError(f"x_star must be positive, got {self.x_star}")


def _prepare(incomes, weights):
    x = np.asarray(incomes, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise DomainError("incomes must be a nonempty 1-d sequence")
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise DomainError("incomes must be finite and nonnegative")
    if weights is None:
        w = np.ones_like(x)
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != x.shape:
            raise DomainError(f"weights length {w.size} != incomes length {x.size}")
        if np.any(~(w > 0)):
            raise DomainError("weights must be positive")
    return x, w


def fgt_empirical(incomes, weights=None, req: FgtRequest = None, *, gamma=None, x_star=None) -> float:
    """Weighted mean of ((x* - x)/x*)^gamma over the poor, zero for the non-poor.

    Accepts either an :class:`FgtRequest` or ``gamma``/``x_star`` keywords.
    """
    if req is None:
        req = FgtRequest(gamma, x_star)
    x, w = _prepare(incomes, weights)
    poor = x < req.x_star
    gap = np.where(poor, (req.x_star - x) / req.x_star, 0.0)
    if req.gamma == 0:
        contrib = poor.astype(float)  # 0**0 counts as 1 for the poor
    else:
        contrib = np.where(poor, gap**req.gamma, 0.0)
    return float(np.sum(w * contrib) / np.sum(w))


def headcount(incomes, weights=None, x_star: float = None) -> float:
    """Weighted share of observations strictly below the poverty line."""
    return fgt_empirical(incomes, weights, FgtRequest(0.0, x_star))


def b1_moment(h: float, b: float, p: float, q: float) -> float:
    """E[W^h] for W ~ B1(b, p, q): b^h B(p+q, h) / B(p, h)."""
    for name, v in (("h", h), ("b", b), ("p", p), ("q", q)):
        if not v > 0:
            raise DomainError(f"{name} must be positive, got {v}")
    return b**h * beta_fn(p + q, h) / beta_fn(p, h)


def fgt_from_b1(alpha: float, headcount: float, gamma: float, x_star: float = 1.0) -> float:
    """FGT index implied by B1(x*, 1, alpha) short-falls among the poor.

    H * B(1 + alpha, gamma) / B(1, gamma) = H * gamma * B(1 + alpha, gamma).
    The index is scale free, so ``x_star`` only enters through validation.
    """
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    if not 0.0 <= headcount <= 1.0:
        raise DomainError(f"headcount must lie in [0, 1], got {headcount}")
    if not gamma >= 0:
        raise DomainError(f"gamma must be >= 0, got {gamma}")
    if not x_star > 0:
        raise DomainError(f"x_star must be positive, got {x_star}")
    if gamma == 0:
        return float(headcount)
    return headcount * gamma * beta_fn(1.0 + alpha, gamma)
