"""Estimators for the shape alpha of the B1(x*, 1, alpha) short-fall model."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateSampleError, DomainError

# short-falls equal to the poverty line are pulled inside by this relative margin
CLIP_MARGIN = 1e-12
MIN_GROUP_SIZE = 30


@dataclass
class ShortfallSample:
    """Short-falls ``y = x_star - consumption`` of poor households."""

    y: np.ndarray
    x_star: float
    label: Optional[str] = None
    n_clipped: int = 0
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float)
        if not self.x_star > 0:
            raise DomainError(f"x_star must be positive, got {self.x_star}")
        if self.y.ndim != 1:
            raise DomainError("short-falls must be a 1-d array")
        if self.y.size and (np.any(self.y <= 0) or np.any(self.y > self.x_star)):
            raise DomainError("short-falls must lie in (0, x_star]")
        if self.weights is not None:
            self.weights = np.asarray(self.weights, dtype=float)

    @property
    def n(self) -> int:
        return int(self.y.size)

    @classmethod
    def from_shortfalls(cls, y, x_star, label=None, weights=None) -> "ShortfallSample":
        """Build a sample, clipping short-falls at the line to x*(1 - 1e-12)."""
        y = np.asarray(y, dtype=float)
        at_line = y >= x_star
        if at_line.any():
            y = np.where(at_line, x_star * (1.0 - CLIP_MARGIN), y)
        return cls(y, x_star, label=label, n_clipped=int(at_line.sum()), weights=weights)


def _require(s: ShortfallSample):
    if s.n == 0:
        raise DegenerateSampleError("empty short-fall sample")
    if np.any(s.y >= s.x_star):
        raise DomainError("short-falls must be strictly below x_star for the likelihood")


def _log_remaining_sum(s: ShortfallSample) -> float:
    # sum log(x* - y_i) - n log x* = sum log1p(-y_i/x*)
    return float(np.sum(np.log1p(-s.y / s.x_star)))


def mle_alpha(s: ShortfallSample) -> float:
    """Maximum likelihood estimate n / (n log x* - sum log(x* - y_i))."""
    _require(s)
    denom = -_log_remaining_sum(s)
    if not denom > 0:
        raise DegenerateSampleError("log-likelihood has no interior maximum (denominator <= 0)")
    alpha = s.n / denom
    if not math.isfinite(alpha) or alpha > 1e12:
        warnings.warn("MLE of alpha is effectively infinite; short-falls are near zero", stacklevel=2)
    return alpha


def mme_alpha(s: ShortfallSample) -> float:
    """Method-of-moments estimate (x* - M1) / M1."""
    _require(s)
    m1 = float(np.mean(s.y))
    if not 0.0 < m1 < s.x_star:
        raise DegenerateSampleError(f"sample mean {m1} outside (0, x_star)")
    return (s.x_star - m1) / m1


def loglik(alpha: float, s: ShortfallSample) -> float:
    """n [log alpha - alpha log x*] + (alpha - 1) sum log(x* - y_i)."""
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    _require(s)
    n = s.n
    return n * (math.log(alpha) - alpha * math.log(s.x_star)) + (alpha - 1.0) * float(
        np.sum(np.log(s.x_star - s.y))
    )


def loglik_slope(alpha: float, s: ShortfallSample) -> float:
    """d loglik / d alpha = n/alpha + sum log1p(-y_i/x*)."""
    _require(s)
    return s.n / alpha + _log_remaining_sum(s)


@dataclass
class FitReport:
    alpha_mle: float
    alpha_mme: float
    n: int
    loglik_at_mle: float
    n_clipped: int = 0
    flags: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "alpha_mle": self.alpha_mle,
            "alpha_mme": self.alpha_mme,
            "n": self.n,
            "loglik_at_mle": self.loglik_at_mle,
            "n_clipped": self.n_clipped,
            "flags": list(self.flags),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FitReport":
        return cls(**d)


def fit(s: ShortfallSample, min_size: int = MIN_GROUP_SIZE) -> FitReport:
    """Fit both estimators; small samples are fitted but flagged."""
    a_mle = mle_alpha(s)
    a_mme = mme_alpha(s)
    flags = []
    if s.n < min_size:
        flags.append(f"n<{min_size}")
    if s.n_clipped:
        flags.append(f"clipped={s.n_clipped}")
    return FitReport(a_mle, a_mme, s.n, loglik(a_mle, s), s.n_clipped, flags)


def fit_groups(samples: dict, min_size: int = MIN_GROUP_SIZE) -> dict:
    """Fit every group; empty groups map to ``None``."""
    out = {}
    for key, s in samples.items():
        out[key] = fit(s, min_size) if s.n else None
    return out


def sample_b1(alpha: float, n: int, rng: np.random.Generator, x_star: float = 1.0) -> np.ndarray:
    """Draw n short-falls from B1(x*, 1, alpha): x* (1 - U^(1/alpha))."""
    v = 1.0 - rng.random(n)  # (0, 1], keeps short-falls below the line
    return x_star * (1.0 - v ** (1.0 / alpha))
