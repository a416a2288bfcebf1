"""Goodness of fit for the B1 short-fall model: KS distance, bootstrap p-value, R^2."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSampleError, DomainError
from .estimate import ShortfallSample, mle_alpha, mme_alpha

ESTIMATORS = {"mle": mle_alpha, "mme": mme_alpha}
BOOT_CHUNK = 256


@dataclass
class GofReport:
    d_stat: float
    p_value: float
    r_squared: float
    n_boot: int
    alpha: float = float("nan")
    estimator: str = "mle"

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, d: dict) -> "GofReport":
        return cls(**d)


def b1_cdf(y, alpha: float, x_star: float):
    """CDF of B1(x*, 1, alpha) evaluated elementwise, clamped to the support."""
    u = np.clip(np.asarray(y, dtype=float) / x_star, 0.0, 1.0)
    return 1.0 - (1.0 - u) ** alpha


def ecdf_at_samples(y: np.ndarray) -> np.ndarray:
    """Right-continuous empirical CDF evaluated at each observation (ties share a value)."""
    srt = np.sort(y)
    return np.searchsorted(srt, y, side="right") / y.size


def ks_statistic(s: ShortfallSample, alpha: float) -> float:
    """sup |F_n - F| with F the fitted B1 CDF.

    The supremum is evaluated at the distinct sample values, comparing F
    against both the left limit and the value of the step function there,
    so tied observations contribute a single jump of their multiplicity.
    """
    if s.n == 0:
        raise DegenerateSampleError("empty sample")
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    values, counts = np.unique(s.y, return_counts=True)
    upper = np.cumsum(counts) / s.n
    lower = upper - counts / s.n
    f = b1_cdf(values, alpha, s.x_star)
    return float(max(np.max(np.abs(upper - f)), np.max(np.abs(lower - f))))


def _ks_sorted_rows(y_sorted: np.ndarray, f: np.ndarray) -> np.ndarray:
    """KS distance per row of a row-sorted sample matrix with fitted CDF values ``f``."""
    n = y_sorted.shape[1]
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - f, axis=1)
    d_minus = np.max(f - (i - 1) / n, axis=1)
    return np.maximum(d_plus, d_minus)


def _refit_rows(y: np.ndarray, x_star: float, estimator: str) -> np.ndarray:
    n = y.shape[1]
    if estimator == "mle":
        return n / -np.sum(np.log1p(-y / x_star), axis=1)
    m1 = y.mean(axis=1)
    return (x_star - m1) / m1


def bootstrap_ks(
    alpha: float,
    n: int,
    x_star: float,
    n_boot: int,
    seed,
    estimator: str = "mle",
    workers: int = 1,
) -> np.ndarray:
    """KS statistics of ``n_boot`` parametric-bootstrap samples with re-fitted alpha.

    Replicates are generated in chunks of ``BOOT_CHUNK``, each from its own
    Philox stream spawned from ``seed`` (an int or a ``SeedSequence``); the
    result does not depend on ``workers``.
    """
    chunks = [BOOT_CHUNK] * (n_boot // BOOT_CHUNK)
    if n_boot % BOOT_CHUNK:
        chunks.append(n_boot % BOOT_CHUNK)
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    seeds = root.spawn(len(chunks))

    def run(j):
        rng = np.random.Generator(np.random.Philox(seeds[j]))
        v = 1.0 - rng.random((chunks[j], n))
        y = np.sort(x_star * (1.0 - v ** (1.0 / alpha)), axis=1)
        y = np.clip(y, np.finfo(float).tiny, x_star * (1.0 - 1e-12))
        a_star = _refit_rows(y, x_star, estimator)
        f = 1.0 - (1.0 - y / x_star) ** a_star[:, None]
        return _ks_sorted_rows(y, f)

    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(len(chunks))))
    else:
        parts = [run(j) for j in range(len(chunks))]
    return np.concatenate(parts)


def pvalue_from_boot(d_obs: float, d_boot: np.ndarray) -> float:
    """Add-one Monte Carlo p-value (1 + #{D* >= D}) / (B + 1)."""
    return float((1 + np.count_nonzero(d_boot >= d_obs)) / (d_boot.size + 1))


def ks_pvalue_sim(
    s: ShortfallSample,
    n_boot: int = 999,
    seed=0,
    estimator: str = "mle",
    workers: int = 1,
    d_obs: float = None,
) -> float:
    """Parametric-bootstrap p-value of the KS statistic, accounting for estimation of alpha."""
    if n_boot < 100:
        raise DomainError(f"n_boot must be >= 100, got {n_boot}")
    if estimator not in ESTIMATORS:
        raise DomainError(f"unknown estimator {estimator!r}")
    alpha = ESTIMATORS[estimator](s)
    if d_obs is None:
        d_obs = ks_statistic(s, alpha)
    d_boot = bootstrap_ks(alpha, s.n, s.x_star, n_boot, seed, estimator, workers)
    return pvalue_from_boot(d_obs, d_boot)


def r_squared(s: ShortfallSample, alpha: float) -> float:
    """Share of variation in fitted CDF values not attributed to fit residuals."""
    if s.n == 0:
        raise DegenerateSampleError("empty sample")
    fitted = b1_cdf(s.y, alpha, s.x_star)
    emp = ecdf_at_samples(s.y)
    explained = float(np.sum((fitted - fitted.mean()) ** 2))
    resid = float(np.sum((emp - fitted) ** 2))
    if explained + resid == 0.0:
        raise DegenerateSampleError("R^2 undefined: no variation in fitted or empirical CDF")
    return explained / (explained + resid)


def gof_report(
    s: ShortfallSample, estimator: str = "mle", n_boot: int = 999, seed=0, workers: int = 1
) -> GofReport:
    alpha = ESTIMATORS[estimator](s)
    d = ks_statistic(s, alpha)
    p = ks_pvalue_sim(s, n_boot, seed, estimator, workers, d_obs=d)
    return GofReport(d, p, r_squared(s, alpha), n_boot, alpha, estimator)
