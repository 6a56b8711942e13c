"""Average error rate and ergodic capacity of selection over a random user population.

All SNR arguments are linear (rho = 10^(dB/10)); capacities are in nats.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .fading import FadingModel, Rayleigh
from .numerics import (
    DomainError,
    QuadratureSpec,
    gaussian_q,
    integrate_finite,
    integrate_semi_infinite,
    scaled_lower_incomplete_gamma,
)
from .selection import BestGainLaw
from .usercount import Deterministic, Poisson, UserCountModel

# relative-only tolerance: deep-tail error rates are far below any useful absolute floor
METRIC_QUAD = QuadratureSpec(rel_tol=1e-11, abs_tol=0.0, max_subdivisions=4000)

CAPACITY_TAIL = 1e-14


class ErrorModel:
    alpha: float
    eta: float

    def pe(self, s):
        raise NotImplementedError

    def b(self, s):
        """Magnitude of the derivative, -dPe/ds."""
        raise NotImplementedError

    def _check(self):
        if not self.alpha > 0 or not self.eta > 0:
            raise DomainError(f"alpha and eta must be positive: {self!r}")


@dataclass(frozen=True)
class ExpForm(ErrorModel):
    """Pe(s) = alpha exp(-eta s)."""

    alpha: float = 1.0
    eta: float = 1.0

    def __post_init__(self):
        self._check()

    def pe(self, s):
        return self.alpha * np.exp(-self.eta * np.asarray(s, dtype=float))

    def b(self, s):
        return self.alpha * self.eta * np.exp(-self.eta * np.asarray(s, dtype=float))

    def __str__(self):
        return f"exp:a={self.alpha:g},eta={self.eta:g}"


@dataclass(frozen=True)
class QForm(ErrorModel):
    """Pe(s) = alpha Q(sqrt(eta s)); the defaults are BPSK-like."""

    alpha: float = 1.0
    eta: float = 2.0

    def __post_init__(self):
        self._check()

    def pe(self, s):
        return self.alpha * gaussian_q(np.sqrt(self.eta * np.asarray(s, dtype=float)))

    def b(self, s):
        s = np.asarray(s, dtype=float)
        return 0.5 * self.alpha * np.sqrt(self.eta / (2.0 * math.pi * s)) * np.exp(-0.5 * self.eta * s)

    def __str__(self):
        return f"qf:a={self.alpha:g},eta={self.eta:g}"


def parse_error_model(text: str) -> ErrorModel:
    """Parse ``exp:a=<alpha>,eta=<eta>`` or ``qf:a=<alpha>,eta=<eta>``."""
    name, _, args = text.strip().lower().partition(":")
    kw = {}
    for part in filter(None, args.split(",")):
        key, eq, val = part.partition("=")
        key = key.strip()
        if not eq or key not in ("a", "alpha", "eta"):
            raise ValueError(f"bad error-model parameter {part!r} in {text!r}")
        try:
            kw["alpha" if key in ("a", "alpha") else "eta"] = float(val)
        except ValueError:
            raise ValueError(f"bad number {val!r} in {text!r}") from None
    if name in ("exp", "expform"):
        return ExpForm(**kw)
    if name in ("qf", "q", "qform"):
        return QForm(**kw)
    raise ValueError(f"unknown error model {text!r}")


def instantaneous_error(model: ErrorModel, s):
    """Conditional error probability at instantaneous SNR s >= 0.

    Values above one (possible only for alpha > 1) are clamped with a warning.
    """
    if np.any(np.asarray(s) < 0):
        raise DomainError(f"instantaneous SNR must be >= 0, got {s!r}")
    val = model.pe(s)
    if np.any(val > 1.0):
        warnings.warn(f"{model} exceeds 1 at s={s!r}; clamping to 1", RuntimeWarning, stacklevel=2)
        val = np.minimum(val, 1.0)
    return float(val) if np.ndim(val) == 0 else val


def error_derivative_mag(model: ErrorModel, s):
    if np.any(np.asarray(s) <= 0):
        raise DomainError(f"derivative needs s > 0, got {s!r}")
    val = model.b(s)
    return float(val) if np.ndim(val) == 0 else val


def _decay_scale(err: ErrorModel, rho: float) -> float:
    # gain scale over which Pe(rho x) falls by a factor e
    return (1.0 if isinstance(err, ExpForm) else 2.0) / (err.eta * rho)


def _error_integral(rho, err, fading, weight, n_eff, quad):
    if not rho > 0:
        raise DomainError(f"rho must be positive, got {rho}")
    d = fading.rv_exponent()
    bulk = 1.0 + math.log(max(n_eff, 1.0))
    scale = min(bulk, (1.0 + d * n_eff) * _decay_scale(err, rho))
    breaks = (bulk,) if scale < 0.1 * bulk else ()

    def integrand(x):
        w = weight(x)
        return float(err.pe(rho * x)) * w if w else 0.0

    return integrate_semi_infinite(integrand, quad, scale=scale, breaks=breaks)


def _power_of_cdf(fading: FadingModel, x: float, n: float) -> float:
    # F(x)^n through log1p of the tail, exact near F = 1
    sf = float(fading.sf(x))
    if sf >= 1.0:
        return 0.0 if n > 0 else 1.0
    return math.exp(n * math.log1p(-sf))


def avg_error_fixed_n(rho: float, n: float, fading: FadingModel, err: ErrorModel,
                      quad: QuadratureSpec = METRIC_QUAD) -> float:
    """Average error rate with exactly n users; n may be real (n >= 1)."""
    if not n >= 1:
        raise DomainError(f"n must be >= 1, got {n}")

    def weight(x):
        return n * _power_of_cdf(fading, x, n - 1.0) * float(fading.pdf(x))

    return _error_integral(rho, err, fading, weight, n, quad)


def avg_error_random_n(rho: float, users: UserCountModel, fading: FadingModel,
                       err: ErrorModel, quad: QuadratureSpec = METRIC_QUAD) -> float:
    """Error rate averaged over fading and the user count.

    An empty system (N = 0) contributes Pe(0) with probability P[N = 0].
    """
    if isinstance(users, Deterministic):
        if users.N == 0:
            return float(err.pe(0.0))
        return avg_error_fixed_n(rho, users.N, fading, err, quad)
    law = BestGainLaw(fading, users)

    def weight(x):
        return float(law.users.pgf_prime(float(fading.cdf(x)))) * float(fading.pdf(x))

    atom = users.pmf(0) * float(err.pe(0.0))
    return atom + _error_integral(rho, err, fading, weight, users.mean(), quad)


def poisson_rayleigh_error_closed(rho: float, lam: float, err: ErrorModel) -> float:
    """Closed-form error rate for Poisson users over Rayleigh fading (exponential Pe).

    alpha lam^(-eta rho) lowergamma(eta rho + 1, lam) + alpha e^(-lam)
    """
    if not isinstance(err, ExpForm):
        raise DomainError("the closed form holds only for the exponential error model")
    if not lam > 0 or not rho > 0:
        raise DomainError("lam and rho must be positive")
    s = err.eta * rho + 1.0
    return err.alpha * (lam * scaled_lower_incomplete_gamma(s, lam) + math.exp(-lam))


def _capacity_integral(rho, tail_fn, n_eff, quad):
    if not rho > 0:
        raise DomainError(f"rho must be positive, got {rho}")
    # upper cutoff where the tail probability falls below CAPACITY_TAIL
    hi = math.log(max(n_eff, 1.0)) + 10.0
    while tail_fn(hi) >= CAPACITY_TAIL:
        hi *= 2.0
    bulk = math.log(max(n_eff, 1.0))
    breaks = tuple(b for b in (1.0 / rho, bulk) if 0 < b < hi)
    val = integrate_finite(lambda x: tail_fn(x) / (1.0 + rho * x), 0.0, hi, quad, breaks=breaks)
    return rho * val


def ergodic_capacity_fixed_n(rho: float, n: float, fading: FadingModel,
                             quad: QuadratureSpec = METRIC_QUAD) -> float:
    """rho * int_0^inf (1 - F(x)^n) / (1 + rho x) dx, in nats; n real, n >= 1."""
    if not n >= 1:
        raise DomainError(f"n must be >= 1, got {n}")

    def tail(x):
        sf = float(fading.sf(x))
        return -math.expm1(n * math.log1p(-sf)) if sf < 1.0 else 1.0

    return _capacity_integral(rho, tail, n, quad)


def ergodic_capacity_random_n(rho: float, users: UserCountModel, fading: FadingModel,
                              quad: QuadratureSpec = METRIC_QUAD) -> float:
    """Ergodic capacity averaged over fading and the user count (N = 0 gives 0)."""
    if isinstance(users, Deterministic):
        if users.N == 0:
            return 0.0
        return ergodic_capacity_fixed_n(rho, users.N, fading, quad)

    def tail(x):
        return float(users.pgf_complement(float(fading.sf(x))))

    return _capacity_integral(rho, tail, users.mean(), quad)


def asymptote_constants(err: ErrorModel, k0_d: float) -> tuple[float, float]:
    """(C1, C2) of the high-SNR equivalent P[N=k0] C1 F^k0(C2 / rho)."""
    if isinstance(err, ExpForm):
        return err.alpha * math.gamma(k0_d + 1.0), 1.0 / err.eta
    if isinstance(err, QForm):
        return err.alpha * math.gamma(k0_d + 0.5) / (2.0 * math.sqrt(math.pi)), 2.0 / err.eta
    raise DomainError(f"no asymptote constants for {err!r}")


def high_snr_asymptote(rho: float, users: UserCountModel, fading: FadingModel,
                       err: ErrorModel) -> float:
    k0 = users.min_support()
    p0 = users.pmf(k0)
    if not p0 > 0:
        raise DomainError("P[N = k0] must be positive")
    c1, c2 = asymptote_constants(err, k0 * fading.rv_exponent())
    return p0 * c1 * float(fading.cdf(c2 / rho)) ** k0


def capacity_scaling(rho: float, lam: float) -> float:
    """Leading large-lam term log(1 + rho log lam) of the Poisson/Rayleigh capacity."""
    if not lam > 1:
        raise DomainError(f"capacity scaling needs lam > 1, got {lam}")
    return math.log1p(rho * math.log(lam))


def is_poisson_rayleigh(users: UserCountModel, fading: FadingModel) -> bool:
    return isinstance(users, Poisson) and isinstance(fading, Rayleigh)

