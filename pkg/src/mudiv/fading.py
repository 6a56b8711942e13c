"""Unit-mean channel-gain laws for i.i.d. user channels.

Each model describes gamma = |h|^2 with E[gamma] = 1.  Distribution methods
accept scalars or numpy arrays and return the same shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special, stats

from .numerics import DomainError


def _as_gain(x):
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError(f"channel gain must be >= 0, got {x!r}")
    return arr


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


class FadingModel:
    """Base class; subclasses implement the tail probability and density."""

    def cdf(self, x):
        return _out(1.0 - self._sf(_as_gain(x)))

    def sf(self, x):
        """Survival function 1 - F(x), accurate in the upper tail."""
        return _out(self._sf(_as_gain(x)))

    def pdf(self, x):
        return _out(self._pdf(_as_gain(x)))

    def quantile(self, p):
        """Smallest x with cdf(x) >= p, for 0 <= p < 1."""
        p = float(p)
        if not 0.0 <= p < 1.0:
            raise DomainError(f"quantile needs p in [0, 1), got {p}")
        if p == 0.0:
            return 0.0
        return self._bracket_root(lambda x: self.cdf(x) - p)

    def isf(self, q):
        """Inverse survival function: x with sf(x) = q, vectorized over q in (0, 1]."""
        q = np.asarray(q, dtype=float)
        if np.any((q <= 0) | (q > 1)):
            raise DomainError("isf needs q in (0, 1]")
        return _out(self._isf(q))

    def sample(self, rng: np.random.Generator, size=None):
        raise NotImplementedError

    def rv_exponent(self) -> float:
        raise NotImplementedError

    def _bracket_root(self, fn):
        hi = 1.0
        while fn(hi) < 0:
            hi *= 2.0
        return optimize.brentq(fn, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps,
                               maxiter=500)


@dataclass(frozen=True)
class Rayleigh(FadingModel):
    """Rayleigh fading: exponentially distributed unit-mean gain."""

    def cdf(self, x):
        return _out(-np.expm1(-_as_gain(x)))

    def _sf(self, x):
        return np.exp(-x)

    def _pdf(self, x):
        return np.exp(-x)

    def quantile(self, p):
        p = float(p)
        if not 0.0 <= p < 1.0:
            raise DomainError(f"quantile needs p in [0, 1), got {p}")
        return -math.log1p(-p)

    def _isf(self, q):
        return -np.log(q)

    def sample(self, rng, size=None):
        # inverse transform
        return -np.log1p(-rng.random(size))

    def rv_exponent(self):
        return 1.0

    def __str__(self):
        return "rayleigh"


@dataclass(frozen=True)
class NakagamiM(FadingModel):
    """Nakagami-m fading: gain ~ Gamma(shape=m, scale=1/m)."""

    m: float

    def __post_init__(self):
        if not self.m >= 0.5:
            raise DomainError(f"Nakagami m must be >= 0.5, got {self.m}")

    def cdf(self, x):
        return _out(special.gammainc(self.m, self.m * _as_gain(x)))

    def _sf(self, x):
        return special.gammaincc(self.m, self.m * x)

    def _pdf(self, x):
        return stats.gamma.pdf(x, self.m, scale=1.0 / self.m)

    def _isf(self, q):
        return special.gammainccinv(self.m, q) / self.m

    def sample(self, rng, size=None):
        return rng.gamma(self.m, 1.0 / self.m, size)

    def rv_exponent(self):
        return float(self.m)

    def __str__(self):
        return f"nakagami:m={self.m:g}"


@dataclass(frozen=True)
class Rician(FadingModel):
    """Rician fading with linear K factor, normalized to unit mean gain.

    2 (1 + K) gamma is noncentral chi-square with two degrees of freedom and
    noncentrality 2K, so F(x) = 1 - Q_1(sqrt(2K), sqrt(2 (1 + K) x)).
    """

    K: float

    def __post_init__(self):
        if not self.K >= 0:
            raise DomainError(f"Rician K must be >= 0, got {self.K}")

    @property
    def _c(self):
        return 2.0 * (1.0 + self.K)

    def cdf(self, x):
        x = _as_gain(x)
        if self.K == 0:
            return _out(-np.expm1(-x))
        return _out(stats.ncx2.cdf(self._c * x, 2, 2 * self.K))

    def _sf(self, x):
        if self.K == 0:
            return np.exp(-x)
        return stats.ncx2.sf(self._c * x, 2, 2 * self.K)

    def _pdf(self, x):
        K = self.K
        c = 1.0 + K
        z = 2.0 * np.sqrt(K * c * x)
        # i0e keeps the Bessel factor finite for large arguments
        return c * np.exp(-K - c * x + z) * special.i0e(z)

    def _isf(self, q):
        if self.K == 0:
            return -np.log(q)
        return stats.ncx2.isf(q, 2, 2 * self.K) / self._c

    def sample(self, rng, size=None):
        los = math.sqrt(self.K / (self.K + 1.0))
        sigma = math.sqrt(0.5 / (self.K + 1.0))
        re = los + sigma * rng.standard_normal(size)
        im = sigma * rng.standard_normal(size)
        return re * re + im * im

    def rv_exponent(self):
        return 1.0

    def __str__(self):
        return f"rician:k={self.K:g}"


def parse_fading(text: str) -> FadingModel:
    """Parse ``rayleigh``, ``nakagami:m=<v>`` or ``rician:k=<v>``."""
    name, _, arg = text.strip().lower().partition(":")
    if "=" in arg:
        key, _, arg = arg.partition("=")
    else:
        key = None
    try:
        if name == "rayleigh" and not arg:
            return Rayleigh()
        if name == "nakagami" and key in (None, "m"):
            return NakagamiM(float(arg))
        if name in ("rician", "rice") and key in (None, "k"):
            return Rician(float(arg))
    except ValueError as exc:
        raise ValueError(f"bad fading model {text!r}: {exc}") from None
    raise ValueError(f"unknown fading model {text!r}")


def gain_cdf(model: FadingModel, x):
    return model.cdf(x)


def gain_pdf(model: FadingModel, x):
    return model.pdf(x)


def gain_quantile(model: FadingModel, p: float) -> float:
    return model.quantile(p)


def sample_gain(model: FadingModel, rng: np.random.Generator, size=None):
    return model.sample(rng, size)


def rv_exponent(model: FadingModel) -> float:
    return model.rv_exponent()
