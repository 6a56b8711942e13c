"""Distributions of the random number of contending users.

Besides pmf/pgf, each model provides ``pgf_complement(q) = 1 - U(1 - q)``
and ``pgf_inverse(u)`` so that composed CDFs can be evaluated and inverted
without cancellation when the single-user CDF is close to one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .numerics import DomainError


def _check_t(t):
    arr = np.asarray(t, dtype=float)
    if np.any((arr < 0) | (arr > 1)) or np.any(np.isnan(arr)):
        raise DomainError(f"PGF argument must lie in [0, 1], got {t!r}")
    return arr


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


class UserCountModel:
    def pmf(self, k):
        raise NotImplementedError

    def pgf(self, t):
        return _out(self._pgf(_check_t(t)))

    def pgf_prime(self, t):
        return _out(self._pgf_prime(_check_t(t)))

    def pgf_complement(self, q):
        """1 - U(1 - q) for q in [0, 1], accurate for small q."""
        return _out(self._pgf_complement(_check_t(q)))

    def pgf_inverse(self, u):
        """Upper-tail form of the inverse PGF: returns q with U(1 - q) = u.

        Defined for u in (U(0), 1]; u <= U(0) maps to q = 1.
        """
        u = np.asarray(u, dtype=float)
        q = np.ones_like(u)
        live = u > self.pmf(0)
        q[live] = self._pgf_inverse_tail(u[live])
        return _out(q)

    def mean(self) -> float:
        raise NotImplementedError

    def min_support(self) -> int:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size=None):
        raise NotImplementedError

    def tail_cutoff(self, tail: float = 1e-13) -> int:
        """Smallest K with P[N > K] < tail."""
        k = self.min_support()
        acc = 0.0
        while True:
            acc += self.pmf(k)
            if 1.0 - acc < tail or k > 10_000_000:
                return k
            k += 1


@dataclass(frozen=True)
class Deterministic(UserCountModel):
    N: int

    def __post_init__(self):
        if self.N < 0 or int(self.N) != self.N:
            raise DomainError(f"deterministic user count must be a non-negative integer, got {self.N}")

    def pmf(self, k):
        return 1.0 if k == self.N else 0.0

    def _pgf(self, t):
        return t ** self.N

    def _pgf_prime(self, t):
        if self.N == 0:
            return np.zeros_like(t)
        return self.N * t ** (self.N - 1)

    def _pgf_complement(self, q):
        if self.N == 0:
            return np.zeros_like(q)
        with np.errstate(divide="ignore"):  # q = 1 gives log1p(-1) = -inf, hence 1
            return -np.expm1(self.N * np.log1p(-q))

    def _pgf_inverse_tail(self, u):
        return -np.expm1(np.log(u) / self.N)

    def mean(self):
        return float(self.N)

    def min_support(self):
        return int(self.N)

    def sample(self, rng, size=None):
        return np.full(size, self.N, dtype=np.int64) if size is not None else int(self.N)

    def tail_cutoff(self, tail=1e-13):
        return int(self.N)

    def __str__(self):
        return f"det:{self.N}"


@dataclass(frozen=True)
class Poisson(UserCountModel):
    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise DomainError(f"Poisson mean must be positive, got {self.lam}")

    def pmf(self, k):
        if k < 0:
            return 0.0
        return math.exp(-self.lam + k * math.log(self.lam) - math.lgamma(k + 1))

    def _pgf(self, t):
        return np.exp(self.lam * (t - 1.0))

    def _pgf_prime(self, t):
        return self.lam * np.exp(self.lam * (t - 1.0))

    def _pgf_complement(self, q):
        return -np.expm1(-self.lam * q)

    def _pgf_inverse_tail(self, u):
        return -np.log(u) / self.lam

    def mean(self):
        return float(self.lam)

    def min_support(self):
        return 0

    def sample(self, rng, size=None):
        return rng.poisson(self.lam, size)

    def __str__(self):
        return f"poisson:{self.lam:g}"


@dataclass(frozen=True)
class Geometric(UserCountModel):
    """Geometric law on {0, 1, 2, ...}: P[N = k] = p (1 - p)^k."""

    p: float

    def __post_init__(self):
        if not 0 < self.p <= 1:
            raise DomainError(f"geometric p must lie in (0, 1], got {self.p}")

    @classmethod
    def from_mean(cls, mean: float) -> "Geometric":
        return cls(1.0 / (1.0 + mean))

    def pmf(self, k):
        if k < 0:
            return 0.0
        if self.p == 1:
            return 1.0 if k == 0 else 0.0
        return self.p * math.exp(k * math.log1p(-self.p))

    def _pgf(self, t):
        return self.p / (1.0 - (1.0 - self.p) * t)

    def _pgf_prime(self, t):
        d = 1.0 - (1.0 - self.p) * t
        return self.p * (1.0 - self.p) / (d * d)

    def _pgf_complement(self, q):
        r = (1.0 - self.p) * q
        return r / (self.p + r)

    def _pgf_inverse_tail(self, u):
        return self.p * (1.0 - u) / (u * (1.0 - self.p))

    def mean(self):
        return (1.0 - self.p) / self.p

    def min_support(self):
        return 0

    def sample(self, rng, size=None):
        # numpy's geometric counts trials, support {1, 2, ...}
        return rng.geometric(self.p, size) - 1

    def __str__(self):
        return f"geom:{self.p:g}"


@dataclass(frozen=True)
class ZeroTruncatedPoisson(UserCountModel):
    """Poisson(lam) conditioned on N >= 1; ``lam`` is the underlying Poisson mean."""

    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise DomainError(f"zero-truncated Poisson parameter must be positive, got {self.lam}")

    @classmethod
    def from_mean(cls, mean: float) -> "ZeroTruncatedPoisson":
        """Model whose mean lam / (1 - e^-lam) equals ``mean`` (> 1)."""
        if not mean > 1:
            raise DomainError(f"zero-truncated Poisson mean must exceed 1, got {mean}")
        lam = optimize.brentq(lambda x: x / -math.expm1(-x) - mean, 1e-12, mean + 1.0,
                              xtol=1e-15, rtol=1e-15)
        return cls(lam)

    @property
    def _norm(self):
        return -math.expm1(-self.lam)

    def pmf(self, k):
        if k < 1:
            return 0.0
        return math.exp(-self.lam + k * math.log(self.lam) - math.lgamma(k + 1)) / self._norm

    def _pgf(self, t):
        # (e^{lam t} - 1) / (e^lam - 1), rescaled by e^-lam to avoid overflow
        return (np.exp(self.lam * (t - 1.0)) - math.exp(-self.lam)) / self._norm

    def _pgf_prime(self, t):
        return self.lam * np.exp(self.lam * (t - 1.0)) / self._norm

    def _pgf_complement(self, q):
        return -np.expm1(-self.lam * q) / self._norm

    def _pgf_inverse_tail(self, u):
        return -np.log1p(-(1.0 - u) * self._norm) / self.lam

    def mean(self):
        return self.lam / self._norm

    def min_support(self):
        return 1

    def sample(self, rng, size=None):
        scalar = size is None
        n = np.atleast_1d(rng.poisson(self.lam, size))
        zeros = n == 0
        while zeros.any():
            n[zeros] = rng.poisson(self.lam, int(zeros.sum()))
            zeros = n == 0
        return int(n[0]) if scalar else n

    def __str__(self):
        return f"ztpoisson:{self.lam:g}"


def parse_users(text: str) -> UserCountModel:
    """Parse ``det:<N>``, ``poisson:<lam>``, ``geom:<p>`` or ``ztpoisson:<lam>``.

    A ``key=`` prefix on the value is accepted (``geom:p=0.2``), and
    ``geom:mean=<m>`` / ``ztpoisson:mean=<m>`` build mean-matched models.
    """
    name, _, arg = text.strip().lower().partition(":")
    key, eq, val = arg.partition("=")
    if not eq:
        key, val = None, arg
    try:
        if name in ("det", "deterministic") and key in (None, "n"):
            n = float(val)
            if n != int(n):
                raise ValueError("deterministic count must be an integer")
            return Deterministic(int(n))
        if name == "poisson" and key in (None, "lam", "lambda", "mean"):
            return Poisson(float(val))
        if name in ("geom", "geometric"):
            if key in (None, "p"):
                return Geometric(float(val))
            if key == "mean":
                return Geometric.from_mean(float(val))
        if name in ("ztpoisson", "ztp"):
            if key in (None, "lam", "lambda"):
                return ZeroTruncatedPoisson(float(val))
            if key == "mean":
                return ZeroTruncatedPoisson.from_mean(float(val))
    except ValueError as exc:
        raise ValueError(f"bad user-count model {text!r}: {exc}") from None
    raise ValueError(f"unknown user-count model {text!r}")


def pmf(model: UserCountModel, k: int) -> float:
    return model.pmf(k)


def pgf(model: UserCountModel, t):
    return model.pgf(t)


def pgf_prime(model: UserCountModel, t):
    return model.pgf_prime(t)


def mean(model: UserCountModel) -> float:
    return model.mean()


def min_support(model: UserCountModel) -> int:
    return model.min_support()


def sample_count(model: UserCountModel, rng: np.random.Generator, size=None):
    return model.sample(rng, size)
