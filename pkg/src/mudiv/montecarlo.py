"""Seeded, reproducible semi-analytic Monte Carlo estimators.

Trials are cut into fixed-size blocks.  Block i draws from its own Philox
stream keyed by (seed, i), so the estimate depends only on (seed, trials):
the worker count changes scheduling, never the numbers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .fading import FadingModel
from .metrics import ErrorModel
from .numerics import DomainError
from .selection import (
    BestGainLaw,
    gumbel_cdf,
    gumbel_constants,
    ks_distance,
    sample_best_gain,
    sample_best_gain_inverse,
)
from .usercount import Deterministic, Poisson, UserCountModel

BLOCK = 1 << 16


@dataclass(frozen=True)
class SimConfig:
    trials: int = 100_000
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise DomainError("trials must be >= 1")
        if self.workers < 1:
            raise DomainError("workers must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class SimResult:
    mean: float
    stderr: float
    trials: int


def block_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def _blocks(trials):
    full, rest = divmod(trials, BLOCK)
    sizes = [BLOCK] * full + ([rest] if rest else [])
    return list(enumerate(sizes))


def _map_blocks(fn, cfg: SimConfig):
    blocks = _blocks(cfg.trials)
    if cfg.workers == 1 or len(blocks) == 1:
        return [fn(i, n) for i, n in blocks]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(lambda b: fn(*b), blocks))


def run_mc(per_trial, cfg: SimConfig) -> SimResult:
    """Mean and standard error of ``per_trial(rng, n)`` values over cfg.trials draws."""

    def block(i, n):
        vals = np.asarray(per_trial(block_rng(cfg.seed, i), n), dtype=float)
        total = math.fsum(vals)
        m = total / n
        return n, total, float(np.sum((vals - m) ** 2)), m

    parts = _map_blocks(block, cfg)
    total = sum(p[0] for p in parts)
    mean = math.fsum(p[1] for p in parts) / total
    m2 = math.fsum([p[2] for p in parts] + [p[0] * (p[3] - mean) ** 2 for p in parts])
    stderr = math.sqrt(m2 / (total - 1) / total) if total > 1 else 0.0
    return SimResult(mean, stderr, total)


def mc_error_rate(rho: float, law: BestGainLaw, err: ErrorModel, cfg: SimConfig) -> SimResult:
    """Sample mean of Pe(rho * gamma*), an unbiased estimate of the average error rate."""
    return run_mc(lambda rng, n: err.pe(rho * sample_best_gain(law, rng, n)), cfg)


def mc_capacity(rho: float, law: BestGainLaw, cfg: SimConfig) -> SimResult:
    return run_mc(lambda rng, n: np.log1p(rho * sample_best_gain(law, rng, n)), cfg)


def mc_outage(x: float, law: BestGainLaw, cfg: SimConfig) -> SimResult:
    if not x >= 0:
        raise DomainError(f"threshold must be >= 0, got {x}")
    return run_mc(lambda rng, n: sample_best_gain(law, rng, n) <= x, cfg)


def uniforms(cfg: SimConfig) -> np.ndarray:
    """The cfg.trials uniforms in (0, 1) of the seeded block streams, in block order."""
    parts = _map_blocks(lambda i, n: 1.0 - block_rng(cfg.seed, i).random(n), cfg)
    return np.concatenate(parts)


def mc_gumbel_ks(lam: float, fading: FadingModel, cfg: SimConfig,
                 users: UserCountModel | None = None) -> float:
    """KS distance between (gamma* - b(lam)) / a(lam) and the Gumbel CDF.

    Best gains are drawn by inverting the composed CDF on the seeded uniform
    stream, so runs with the same seed share random numbers across lam and
    differences in KS reflect the law rather than sampling noise.
    """
    users = users or Poisson(lam)
    a, b = gumbel_constants(fading, lam)
    gains = sample_best_gain_inverse(BestGainLaw(fading, users), uniforms(cfg))
    return ks_distance((gains - b) / a, gumbel_cdf)


def mc_gumbel_ks_deterministic(n: int, fading: FadingModel, cfg: SimConfig) -> float:
    """Same statistic for exactly n users, normalized with a(n), b(n)."""
    return mc_gumbel_ks(float(n), fading, cfg, users=Deterministic(n))
