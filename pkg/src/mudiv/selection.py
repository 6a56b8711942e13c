"""Law of the selected (best) user's channel gain.

With N users drawn from a count model with PGF U and i.i.d. gains with CDF F,
the best gain has CDF U(F(x)) on [0, inf), including an atom of mass
P[N = 0] at the origin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fading import FadingModel, Rayleigh
from .numerics import DomainError
from .usercount import Poisson, UserCountModel


@dataclass(frozen=True)
class BestGainLaw:
    fading: FadingModel
    users: UserCountModel

    @property
    def atom_at_zero(self) -> float:
        return self.users.pmf(0)

    def cdf(self, x):
        return best_cdf(self, x)

    def sf(self, x):
        """P[gamma* > x], computed without cancellation in the upper tail."""
        if np.any(np.asarray(x) < 0):
            raise DomainError("gain must be >= 0")
        return self.users.pgf_complement(self.fading.sf(x))

    def density(self, x):
        return best_density(self, x)

    def cdf_left(self, x):
        """Left limit P[gamma* < x]; differs from cdf only at the atom x = 0."""
        x = np.asarray(x, dtype=float)
        out = np.where(x > 0, best_cdf(self, np.maximum(x, 0.0)), 0.0)
        return float(out) if np.ndim(out) == 0 else out


def best_cdf(law: BestGainLaw, x):
    """U_N(F(x)), the CDF of the best user's gain."""
    if np.any(np.asarray(x) < 0):
        raise DomainError(f"gain must be >= 0, got {x!r}")
    return law.users.pgf(law.fading.cdf(x))


def best_density(law: BestGainLaw, x):
    """Density of the absolutely continuous part, U'_N(F(x)) f(x), for x > 0."""
    if np.any(np.asarray(x) <= 0):
        raise DomainError(f"best_density needs x > 0, got {x!r}")
    return law.users.pgf_prime(law.fading.cdf(x)) * law.fading.pdf(x)


def outage_poisson(lam: float, fading: FadingModel, x):
    """Outage probability exp(-lam (1 - F(x))) for Poisson users."""
    if not lam > 0:
        raise DomainError(f"lam must be positive, got {lam}")
    if np.any(np.asarray(x) < 0):
        raise DomainError(f"threshold must be >= 0, got {x!r}")
    out = np.exp(-lam * np.asarray(fading.sf(x)))
    return float(out) if np.ndim(out) == 0 else out


def gumbel_constants(fading: FadingModel, lam: float) -> tuple[float, float]:
    """Scale a(lam) = 1 / (lam f(b)) and shift b(lam) = F^-1(1 - 1/lam)."""
    if not lam > 1:
        raise DomainError(f"Gumbel normalization needs lam > 1, got {lam}")
    b = float(fading.isf(1.0 / lam))
    a = 1.0 / (lam * fading.pdf(b))
    return a, b


def gumbel_cdf(x):
    out = np.exp(-np.exp(-np.asarray(x, dtype=float)))
    return float(out) if np.ndim(out) == 0 else out


def _max_of_n(fading: FadingModel, n, v):
    # max of n i.i.d. gains equals F^-1(V^(1/n)); the upper-tail form keeps precision
    n = np.asarray(n)
    out = np.zeros(n.shape, dtype=float)
    live = n > 0
    if np.any(live):
        q = -np.expm1(np.log(v[live]) / n[live])
        out[live] = fading.isf(np.maximum(q, np.finfo(float).tiny))
    return out


def sample_best_gain(law: BestGainLaw, rng: np.random.Generator, size=None):
    """Draw N from the count model, then the largest of N fading gains (0 if N = 0).

    The maximum is drawn in O(1) as F^-1(V^(1/N)) rather than by
    materializing N gains.
    """
    scalar = size is None
    shape = (1,) if scalar else size
    n = np.asarray(law.users.sample(rng, shape))
    v = 1.0 - rng.random(shape)  # in (0, 1]
    out = _max_of_n(law.fading, n, v)
    return float(out[0]) if scalar else out


def sample_best_gain_inverse(law: BestGainLaw, u):
    """Inverse-transform map from uniforms u in (0, 1) to best-gain draws.

    Monotone in u, so a shared uniform stream couples draws across laws.
    """
    u = np.asarray(u, dtype=float)
    q = np.asarray(law.users.pgf_inverse(u), dtype=float)
    out = np.zeros(u.shape)
    live = q < 1.0
    out[live] = law.fading.isf(np.maximum(q[live], np.finfo(float).tiny))
    return out


def poisson_rayleigh_law(lam: float) -> BestGainLaw:
    return BestGainLaw(Rayleigh(), Poisson(lam))


def ks_distance(samples, cdf, cdf_left=None) -> float:
    """Two-sided Kolmogorov-Smirnov distance between samples and a CDF.

    For a law with atoms pass ``cdf_left`` (the left limit F(x-)), e.g.
    ``law.cdf_left``; otherwise the CDF is taken as continuous.
    """
    xs = np.sort(np.asarray(samples, dtype=float))
    n = xs.size
    f = np.asarray(cdf(xs), dtype=float)
    f_left = f if cdf_left is None else np.asarray(cdf_left(xs), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f_left - (i - 1) / n)))

