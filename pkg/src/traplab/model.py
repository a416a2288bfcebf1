"""Exact simulation of the household capital process.

Above the critical capital ``x_star`` the surplus ``X - x_star`` grows at
rate ``r``; at Poisson(``lam``) epochs capital is multiplied by a remaining
proportion ``Z ~ Beta(alpha, 1)``.  The inter-jump flow is integrated in
closed form, so paths are simulated jump to jump without time stepping.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError

BLOCK_SIZE = 8192
DEFAULT_MAX_JUMPS = 100_000


@dataclass(frozen=True)
class ModelParams:
    r: float
    lam: float
    alpha: float
    x_star: float

    def __post_init__(self):
        for name in ("r", "lam", "alpha", "x_star"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise DomainError(f"{name} must be positive and finite, got {v}")

    @property
    def net_condition(self) -> bool:
        """True when alpha > lam / r, the regime where trapping is not certain."""
        return self.alpha > self.lam / self.r


@dataclass(frozen=True)
class SimConfig:
    n_paths: int = 10_000
    seed: int = 0
    horizon: Optional[float] = None
    upper_barrier_prob: float = 1e-6
    max_jumps: int = DEFAULT_MAX_JUMPS

    def __post_init__(self):
        if self.n_paths < 1:
            raise DomainError("n_paths must be >= 1")
        if not 0.0 < self.upper_barrier_prob < 1.0:
            raise DomainError("upper_barrier_prob must lie in (0, 1)")
        if self.horizon is not None and not self.horizon > 0:
            raise DomainError("horizon must be positive when given")


@dataclass(frozen=True)
class TrappingEvent:
    trapped: bool
    end_capital: float
    tau: Optional[float] = None
    surplus_before: Optional[float] = None
    deficit: Optional[float] = None


def flow(x0: float, dt: float, p: ModelParams) -> float:
    """Deterministic capital after ``dt`` time units without losses."""
    if x0 > p.x_star:
        return (x0 - p.x_star) * math.exp(p.r * dt) + p.x_star
    return x0


def sample_loss_proportion(alpha: float, rng: np.random.Generator, size=None):
    """Draw Z ~ Beta(alpha, 1) by inverting G(z) = z**alpha."""
    u = rng.random(size)
    return u ** (1.0 / alpha)


def upper_barrier(p: ModelParams, eps: float) -> float:
    """Capital level above which the trapping probability is below ``eps``.

    Returns ``inf`` when trapping is certain (no net condition) or when the
    level would exceed the floating-point range.
    """
    if not p.net_condition:
        return math.inf
    from .gerbershiu import trapping_probability

    def psi_at(log_y):
        return trapping_probability(p.x_star * math.exp(log_y), p)

    hi = 1.0
    while psi_at(hi) > eps:
        hi *= 2.0
        if hi > 700.0:
            return math.inf
    lo = 0.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if psi_at(mid) > eps:
            lo = mid
        else:
            hi = mid
    return p.x_star * math.exp(hi)


def simulate_one(
    x0: float,
    p: ModelParams,
    cfg: SimConfig,
    rng: np.random.Generator,
    loss_sampler: Optional[Callable[[np.random.Generator], float]] = None,
    x_high: Optional[float] = None,
) -> TrappingEvent:
    """Simulate a single path until trapping or censoring.

    ``loss_sampler`` replaces the Beta(alpha, 1) draw and exists for tests.
    ``x_high`` defaults to the level where the closed-form trapping
    probability equals ``cfg.upper_barrier_prob``.
    """
    if x0 < p.x_star:
        raise DomainError(f"initial capital {x0} below x_star {p.x_star}")
    if x_high is None:
        x_high = upper_barrier(p, cfg.upper_barrier_prob)
    t = 0.0
    x = x0
    for _ in range(cfg.max_jumps):
        dt = rng.exponential(1.0 / p.lam)
        if cfg.horizon is not None and t + dt > cfg.horizon:
            return TrappingEvent(False, flow(x, cfg.horizon - t, p))
        t += dt
        pre = flow(x, dt, p)
        if pre >= x_high:
            return TrappingEvent(False, pre)
        z = loss_sampler(rng) if loss_sampler is not None else sample_loss_proportion(p.alpha, rng)
        x = pre * z
        if x < p.x_star:
            return TrappingEvent(True, x, tau=t, surplus_before=pre - p.x_star, deficit=p.x_star - x)
    return TrappingEvent(False, x)


@dataclass
class PathBatch:
    """Per-path outcomes for a block of simulated paths (NaN where absent)."""

    trapped: np.ndarray
    tau: np.ndarray
    surplus_before: np.ndarray
    deficit: np.ndarray
    end_capital: np.ndarray
    censored_jumps: int = 0


def simulate_paths(
    x0: float,
    p: ModelParams,
    n: int,
    rng: np.random.Generator,
    x_high: float,
    horizon: Optional[float] = None,
    max_jumps: int = DEFAULT_MAX_JUMPS,
) -> PathBatch:
    """Vectorized jump-chain simulation of ``n`` paths sharing one stream.

    All active paths advance one jump per iteration, drawing an
    inter-arrival time and a uniform in that order.
    """
    if x0 < p.x_star:
        raise DomainError(f"initial capital {x0} below x_star {p.x_star}")
    cap = np.full(n, float(x0))
    t = np.zeros(n)
    trapped = np.zeros(n, dtype=bool)
    tau = np.full(n, np.nan)
    surplus = np.full(n, np.nan)
    deficit = np.full(n, np.nan)
    active = np.arange(n)
    inv_alpha = 1.0 / p.alpha
    jumps = 0
    while active.size and jumps < max_jumps:
        jumps += 1
        m = active.size
        dt = rng.exponential(1.0 / p.lam, size=m)
        u = rng.random(m)
        x = cap[active]
        t_new = t[active] + dt
        grow = x > p.x_star
        if horizon is not None:
            over = t_new > horizon
            if over.any():
                idx = active[over]
                rem = horizon - t[idx]
                cap[idx] = np.where(
                    grow[over], (x[over] - p.x_star) * np.exp(p.r * rem) + p.x_star, x[over]
                )
                keep = ~over
                active, x, t_new, dt, u, grow = (
                    active[keep], x[keep], t_new[keep], dt[keep], u[keep], grow[keep],
                )
        pre = np.where(grow, (x - p.x_star) * np.exp(p.r * dt) + p.x_star, x)
        t[active] = t_new
        high = pre >= x_high
        if high.any():
            cap[active[high]] = pre[high]
        post = pre * u**inv_alpha
        hit = (post < p.x_star) & ~high
        idx = active[hit]
        trapped[idx] = True
        tau[idx] = t_new[hit]
        surplus[idx] = pre[hit] - p.x_star
        deficit[idx] = p.x_star - post[hit]
        cap[idx] = post[hit]
        cont = ~(hit | high)
        cap[active[cont]] = post[cont]
        active = active[cont]
    return PathBatch(trapped, tau, surplus, deficit, cap, censored_jumps=int(active.size))


@dataclass
class MonteCarloSummary:
    n_paths: int
    n_trapped: int
    psi_hat: float
    se_psi: float
    mean_tau_given_trapped: float
    se_tau_given_trapped: float
    mean_tau_trapped: float
    se_tau_trapped: float
    delta: float
    discounted_hat: float
    se_discounted: float
    x_high: float
    n_censored_jumps: int
    tau_samples: np.ndarray = field(repr=False)
    deficit_samples: np.ndarray = field(repr=False)
    surplus_samples: np.ndarray = field(repr=False)

    def to_dict(self, include_samples: bool = False) -> dict:
        out = {
            k: getattr(self, k)
            for k in (
                "n_paths", "n_trapped", "psi_hat", "se_psi",
                "mean_tau_given_trapped", "se_tau_given_trapped",
                "mean_tau_trapped", "se_tau_trapped",
                "delta", "discounted_hat", "se_discounted",
                "x_high", "n_censored_jumps",
            )
        }
        if include_samples:
            out["tau_samples"] = self.tau_samples.tolist()
            out["deficit_samples"] = self.deficit_samples.tolist()
            out["surplus_samples"] = self.surplus_samples.tolist()
        return out


def _mean_se(v: np.ndarray) -> tuple[float, float]:
    if v.size == 0:
        return math.nan, math.nan
    if v.size == 1:
        return float(v[0]), math.nan
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))


def monte_carlo(
    x0: float,
    p: ModelParams,
    cfg: SimConfig,
    delta: float = 0.0,
    workers: int = 1,
) -> MonteCarloSummary:
    """Replicate ``cfg.n_paths`` independent paths and summarize them.

    Paths are split into fixed blocks of ``BLOCK_SIZE``; block ``i`` draws
    from a Philox stream spawned from ``cfg.seed``, so output depends only
    on the seed and ``n_paths``, never on ``workers``.
    """
    if delta < 0:
        raise DomainError("delta must be nonnegative")
    x_high = upper_barrier(p, cfg.upper_barrier_prob)
    sizes = [BLOCK_SIZE] * (cfg.n_paths // BLOCK_SIZE)
    if cfg.n_paths % BLOCK_SIZE:
        sizes.append(cfg.n_paths % BLOCK_SIZE)
    seeds = np.random.SeedSequence(cfg.seed).spawn(len(sizes))

    def run(i):
        rng = np.random.Generator(np.random.Philox(seeds[i]))
        return simulate_paths(x0, p, sizes[i], rng, x_high, cfg.horizon, cfg.max_jumps)

    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(run, range(len(sizes))))
    else:
        batches = [run(i) for i in range(len(sizes))]

    trapped = np.concatenate([b.trapped for b in batches])
    tau = np.concatenate([b.tau for b in batches])
    deficit = np.concatenate([b.deficit for b in batches])
    surplus = np.concatenate([b.surplus_before for b in batches])
    n = trapped.size
    n_trapped = int(trapped.sum())
    psi_hat = n_trapped / n
    se_psi = math.sqrt(psi_hat * (1.0 - psi_hat) / n)
    tau_tr = tau[trapped]
    mean_cond, se_cond = _mean_se(tau_tr)
    mean_joint, se_joint = _mean_se(np.where(trapped, tau, 0.0))
    disc = np.where(trapped, np.exp(-delta * np.nan_to_num(tau)), 0.0)
    disc_hat, se_disc = _mean_se(disc)
    return MonteCarloSummary(
        n_paths=n,
        n_trapped=n_trapped,
        psi_hat=psi_hat,
        se_psi=se_psi,
        mean_tau_given_trapped=mean_cond,
        se_tau_given_trapped=se_cond,
        mean_tau_trapped=mean_joint,
        se_tau_trapped=se_joint,
        delta=delta,
        discounted_hat=disc_hat,
        se_discounted=se_disc,
        x_high=x_high,
        n_censored_jumps=sum(b.censored_jumps for b in batches),
        tau_samples=tau_tr,
        deficit_samples=deficit[trapped],
        surplus_samples=surplus[trapped],
    )
