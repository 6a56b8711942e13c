"""Structural checks and comparators for user-count distributions.

Covers discrete complete monotonicity of sampled sequences, Laplace-transform
ordering of count laws through their PGFs, Jensen gaps, the regular-variation
exponent of the Bernstein density t(u), and diversity-order fitting.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .fading import FadingModel
from .metrics import (
    ErrorModel,
    ExpForm,
    QForm,
    avg_error_fixed_n,
    avg_error_random_n,
    ergodic_capacity_fixed_n,
    ergodic_capacity_random_n,
)
from .numerics import DomainError, forward_differences
from .usercount import Poisson, UserCountModel


class NumericalInstabilityError(ArithmeticError):
    pass


class Relation(enum.Enum):
    XleY = "X<=Lt Y"
    YleX = "Y<=Lt X"
    Equal = "X=Lt Y"
    Incomparable = "incomparable"


@dataclass
class OrderingVerdict:
    relation: Relation
    max_violation: float
    grid_size: int


@dataclass
class CmReport:
    max_order_checked: int
    tolerance: float
    first_violation: tuple[int, int, float] | None = None
    min_margin: list[float] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.first_violation is None


def check_cm(seq, max_order: int, tol: float = 1e-9) -> CmReport:
    """Check (-1)^k Delta^k seq >= 0 for k = 0..max_order.

    ``tol`` is relative: entry i of the order-k difference may dip below zero
    by at most tol * max|seq[i..i+k]| before it counts as a violation.
    """
    arr = np.asarray(seq, dtype=float)
    if arr.ndim != 1 or arr.size <= max_order:
        raise DomainError(f"sequence length {arr.size} must exceed max_order {max_order}")
    report = CmReport(max_order_checked=max_order, tolerance=tol)
    absval = np.abs(arr)
    for k in range(max_order + 1):
        signed = (-1) ** k * forward_differences(arr, k)
        n = signed.size
        local = np.max(np.stack([absval[j:j + n] for j in range(k + 1)]), axis=0)
        margin = signed / np.where(local > 0, local, 1.0)
        report.min_margin.append(float(margin.min()))
        bad = np.nonzero(margin < -tol)[0]
        if bad.size and report.first_violation is None:
            i = int(bad[0])
            report.first_violation = (k, i, float(signed[i]))
    return report


def check_cmd(seq, max_order: int, tol: float = 1e-9) -> CmReport:
    """Complete monotonicity of the first-difference sequence."""
    arr = np.asarray(seq, dtype=float)
    if arr.size <= max_order + 1:
        raise DomainError(f"sequence length {arr.size} must exceed max_order + 1")
    return check_cm(forward_differences(arr, 1), max_order, tol)


def lt_order_check(x: UserCountModel, y: UserCountModel, grid: int = 1001,
                   tol: float = 1e-12) -> OrderingVerdict:
    """Decide X <=Lt Y (U_X >= U_Y on [0, 1]) on a uniform grid.

    A pass is a grid verification, not a proof.
    """
    if grid < 11:
        raise DomainError("grid must have at least 11 points")
    t = np.linspace(0.0, 1.0, grid)
    diff = np.asarray(x.pgf(t)) - np.asarray(y.pgf(t))
    x_le_y = float(max(0.0, -diff.min()))
    y_le_x = float(max(0.0, diff.max()))
    if x_le_y <= tol and y_le_x <= tol:
        return OrderingVerdict(Relation.Equal, max(x_le_y, y_le_x), grid)
    if x_le_y <= tol:
        return OrderingVerdict(Relation.XleY, x_le_y, grid)
    if y_le_x <= tol:
        return OrderingVerdict(Relation.YleX, y_le_x, grid)
    return OrderingVerdict(Relation.Incomparable, min(x_le_y, y_le_x), grid)


@dataclass
class ConsequenceRow:
    rho: float
    error_x: float
    error_y: float
    capacity_x: float
    capacity_y: float
    holds: bool


def ordering_consequences(x: UserCountModel, y: UserCountModel, fading: FadingModel,
                          err: ErrorModel, rho_grid, rel_tol: float = 1e-9,
                          verdict: OrderingVerdict | None = None) -> list[ConsequenceRow]:
    """Error rates and capacities of both populations at each rho.

    If X <=Lt Y, X must have the larger error rate and the smaller capacity
    at every rho (mirrored for Y <=Lt X; both equalities when equal).
    """
    verdict = verdict or lt_order_check(x, y)
    if verdict.relation is Relation.Incomparable:
        raise DomainError(f"{x} and {y} are not Laplace-transform ordered")
    rows = []
    for rho in rho_grid:
        ex = avg_error_random_n(rho, x, fading, err)
        ey = avg_error_random_n(rho, y, fading, err)
        cx = ergodic_capacity_random_n(rho, x, fading)
        cy = ergodic_capacity_random_n(rho, y, fading)
        slack_e = rel_tol * max(ex, ey)
        slack_c = rel_tol * max(cx, cy)
        if verdict.relation is Relation.XleY:
            holds = ex >= ey - slack_e and cx <= cy + slack_c
        elif verdict.relation is Relation.YleX:
            holds = ey >= ex - slack_e and cy <= cx + slack_c
        else:
            holds = abs(ex - ey) <= slack_e and abs(cx - cy) <= slack_c
        rows.append(ConsequenceRow(rho, ex, ey, cx, cy, holds))
    return rows


def ordering_consequence_check(x: UserCountModel, y: UserCountModel, fading: FadingModel,
                               err: ErrorModel, rho_grid) -> bool:
    return all(r.holds for r in ordering_consequences(x, y, fading, err, rho_grid))


def _require_mean_at_least_one(users):
    lam = users.mean()
    if lam < 1:
        raise DomainError(f"mean user count must be >= 1 for the fixed-N comparator, got {lam}")
    return lam


def jensen_gap(rho: float, users: UserCountModel, fading: FadingModel, err: ErrorModel) -> float:
    """E_N[Pe(rho, N)] - Pe(rho, E[N]); non-negative by convexity in N."""
    lam = _require_mean_at_least_one(users)
    return avg_error_random_n(rho, users, fading, err) - avg_error_fixed_n(rho, lam, fading, err)


def capacity_jensen_gap(rho: float, users: UserCountModel, fading: FadingModel) -> float:
    """C(rho, E[N]) - E_N[C(rho, N)]; non-negative by concavity in N."""
    lam = _require_mean_at_least_one(users)
    return ergodic_capacity_fixed_n(rho, lam, fading) - ergodic_capacity_random_n(rho, users, fading)


def jensen_tightness_scan(rho: float, lam_list, fading: FadingModel, err: ErrorModel):
    """(lam, gap, lam * gap / Pe(rho, lam)) for Poisson users at each lam."""
    lams = [float(v) for v in lam_list]
    if any(b <= a for a, b in zip(lams, lams[1:])) or min(lams) <= 1:
        raise DomainError("lam_list must be increasing and > 1")
    rows = []
    for lam in lams:
        fixed = avg_error_fixed_n(rho, lam, fading, err)
        gap = avg_error_random_n(rho, Poisson(lam), fading, err) - fixed
        rows.append((lam, gap, gap * lam / fixed))
    return rows


def t_function(u: float, rho: float, err: ErrorModel, fading: FadingModel) -> float:
    """Bernstein density t(u) = rho B(rho x) e^-u / f(x) with x = F^-1(e^-u).

    The error rate with N users is the Laplace transform of t evaluated at N.
    """
    if not u > 0:
        raise DomainError(f"t(u) needs u > 0, got {u}")
    q = -math.expm1(-u)
    x = float(fading.isf(q))
    if x == 0.0:
        return 0.0
    dens = float(fading.pdf(x))
    if dens == 0.0:
        return 0.0
    return rho * float(err.b(rho * x)) * math.exp(-u) / dens


def t_rayleigh_exp(u: float, rho: float, err: ExpForm) -> float:
    """Closed form of t(u) for Rayleigh gains and Pe = alpha e^(-eta s)."""
    a = err.eta * rho
    return err.alpha * err.eta * rho * (-math.expm1(-u)) ** (a - 1.0) * math.exp(-u)


def t_rayleigh_q(u: float, rho: float, err: QForm) -> float:
    """Closed form of t(u) for Rayleigh gains and Pe = alpha Q(sqrt(eta s))."""
    a = err.eta * rho
    q = -math.expm1(-u)
    return (err.alpha * math.sqrt(a) * q ** (0.5 * a - 1.0) * math.exp(-u)
            / (2.0 * math.sqrt(-2.0 * math.pi * math.log(q))))


def rv_exponent_estimate(t_fn, kappa: float = 2.0, us=(1e-3, 1e-4, 1e-5),
                         max_spread: float = 0.05) -> float:
    """Regular-variation exponent of t at u = 0.

    Local exponents log(t(kappa u) / t(u)) / log(kappa) are extrapolated to
    u -> 0 linearly in 1 / log(u), which removes the leading drift caused by
    logarithmic slowly varying factors.
    """
    if not kappa > 1:
        raise DomainError("kappa must exceed 1")
    est = []
    for u in us:
        lo, hi = t_fn(u), t_fn(kappa * u)
        if not (lo > 0 and hi > 0):
            raise NumericalInstabilityError(f"t must be positive near 0 (t({u}) = {lo})")
        est.append(math.log(hi / lo) / math.log(kappa))
    if max(abs(b - a) for a, b in zip(est, est[1:])) > max_spread:
        raise NumericalInstabilityError(f"local exponents do not settle: {est}")
    z = np.array([1.0 / math.log(u) for u in us])
    slope, intercept = np.polyfit(z, np.array(est), 1)
    return float(intercept)


def diversity_order_fit(curve, window=(35.0, 45.0)) -> float:
    """Least-squares slope of -log10(error) against log10(rho) inside a dB window."""
    pts = [(db, e) for db, e in curve if window[0] <= db <= window[1]]
    if len(pts) < 4:
        raise DomainError(f"need at least 4 points inside {window}, got {len(pts)}")
    x = np.array([db / 10.0 for db, _ in pts])
    y = -np.log10(np.array([e for _, e in pts]))
    return float(np.polyfit(x, y, 1)[0])
