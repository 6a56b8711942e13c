"""Curve builders shared by the CLI commands and figure recipes.

Every builder returns a list of CurvePoint rows; dB values enter here and
are converted to linear SNR once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import analysis, metrics, montecarlo
from .fading import FadingModel
from .metrics import ErrorModel, ExpForm
from .montecarlo import SimConfig
from .selection import BestGainLaw, best_cdf, outage_poisson
from .usercount import Poisson, UserCountModel

CSV_HEADER = ("x", "value", "stderr", "method", "users", "fading", "err", "snr_db")
METHODS = ("closed", "quad", "mc", "asymptote")


@dataclass
class CurvePoint:
    x: float | None
    value: float
    stderr: float | None
    method: str
    users: str = ""
    fading: str = ""
    err: str = ""
    snr_db: float | str | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method tag {self.method!r}")


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def _mc_cfg(trials, seed, workers):
    return SimConfig(int(trials), int(seed), int(workers)) if trials else None


def error_rate_rows(users_list, fading: FadingModel, err: ErrorModel, snr_db, *,
                    trials=0, seed=0, workers=1, closed=True, quad=True,
                    asymptote=False) -> list[CurvePoint]:
    cfg = _mc_cfg(trials, seed, workers)
    rows = []
    for users in users_list:
        tags = dict(users=str(users), fading=str(fading), err=str(err))
        law = BestGainLaw(fading, users)
        for db in snr_db:
            rho = db_to_linear(db)
            if quad:
                rows.append(CurvePoint(db, metrics.avg_error_random_n(rho, users, fading, err),
                                       None, "quad", snr_db=db, **tags))
            if closed and metrics.is_poisson_rayleigh(users, fading) and isinstance(err, ExpForm):
                rows.append(CurvePoint(db, metrics.poisson_rayleigh_error_closed(rho, users.lam, err),
                                       None, "closed", snr_db=db, **tags))
            if asymptote:
                rows.append(CurvePoint(db, metrics.high_snr_asymptote(rho, users, fading, err),
                                       None, "asymptote", snr_db=db, **tags))
            if cfg:
                r = montecarlo.mc_error_rate(rho, law, err, cfg)
                rows.append(CurvePoint(db, r.mean, r.stderr, "mc", snr_db=db, **tags))
    return rows


def capacity_rows(users_list, fading: FadingModel, snr_db, *, trials=0, seed=0, workers=1,
                  asymptote=True) -> list[CurvePoint]:
    cfg = _mc_cfg(trials, seed, workers)
    rows = []
    for users in users_list:
        tags = dict(users=str(users), fading=str(fading))
        law = BestGainLaw(fading, users)
        for db in snr_db:
            rho = db_to_linear(db)
            rows.append(CurvePoint(db, metrics.ergodic_capacity_random_n(rho, users, fading),
                                   None, "quad", snr_db=db, **tags))
            if asymptote and metrics.is_poisson_rayleigh(users, fading) and users.lam > 1:
                rows.append(CurvePoint(db, metrics.capacity_scaling(rho, users.lam),
                                       None, "asymptote", snr_db=db, **tags))
            if cfg:
                r = montecarlo.mc_capacity(rho, law, cfg)
                rows.append(CurvePoint(db, r.mean, r.stderr, "mc", snr_db=db, **tags))
    return rows


def vs_lambda_rows(families, lam_grid, fading, snr_db, *, err=None, trials=0, seed=0,
                   workers=1) -> list[CurvePoint]:
    """Error rate (err given) or capacity (err None) against the mean user count.

    ``families`` maps a mean to a count model, e.g. ``Geometric.from_mean``.
    """
    cfg = _mc_cfg(trials, seed, workers)
    rho = db_to_linear(snr_db)
    rows = []
    for family in families:
        for lam in lam_grid:
            users = family(lam)
            tags = dict(users=str(users), fading=str(fading), err=str(err) if err else "",
                        snr_db=snr_db)
            law = BestGainLaw(fading, users)
            if err is not None:
                val = metrics.avg_error_random_n(rho, users, fading, err)
            else:
                val = metrics.ergodic_capacity_random_n(rho, users, fading)
            rows.append(CurvePoint(lam, val, None, "quad", **tags))
            if cfg:
                if err is not None:
                    r = montecarlo.mc_error_rate(rho, law, err, cfg)
                else:
                    r = montecarlo.mc_capacity(rho, law, cfg)
                rows.append(CurvePoint(lam, r.mean, r.stderr, "mc", **tags))
    return rows


def outage_rows(users_list, fading, x_grid, *, trials=0, seed=0, workers=1):
    cfg = _mc_cfg(trials, seed, workers)
    rows = []
    for users in users_list:
        tags = dict(users=str(users), fading=str(fading), snr_db="")
        law = BestGainLaw(fading, users)
        for x in x_grid:
            if isinstance(users, Poisson):
                rows.append(CurvePoint(x, outage_poisson(users.lam, fading, x), None, "closed", **tags))
            else:
                rows.append(CurvePoint(x, best_cdf(law, x), None, "closed", **tags))
            if cfg:
                r = montecarlo.mc_outage(x, law, cfg)
                rows.append(CurvePoint(x, r.mean, r.stderr, "mc", **tags))
    return rows


def cm_rows(fading, err, snr_db, n_max=40):
    """P_e(rho, N) and C(rho, N) for N = 1..n_max (capacity rows carry an empty err)."""
    rows, seqs = [], {}
    for db in snr_db:
        rho = db_to_linear(db)
        pe = [metrics.avg_error_fixed_n(rho, n, fading, err) for n in range(1, n_max + 1)]
        cap = [metrics.ergodic_capacity_fixed_n(rho, n, fading) for n in range(1, n_max + 1)]
        seqs[db] = (pe, cap)
        for n, v in enumerate(pe, 1):
            rows.append(CurvePoint(n, v, None, "quad", f"det:{n}", str(fading), str(err), db))
        for n, v in enumerate(cap, 1):
            rows.append(CurvePoint(n, v, None, "quad", f"det:{n}", str(fading), "", db))
    return rows, seqs


def jensen_rows(lam_grid, fading, err, snr_db):
    """Poisson(lam) error rate against the fixed-N rate at N = lam; also returns the scan."""
    rows, scans = [], {}
    for db in snr_db:
        rho = db_to_linear(db)
        scan = analysis.jensen_tightness_scan(rho, lam_grid, fading, err)
        scans[db] = scan
        for lam, gap, _ in scan:
            fixed = metrics.avg_error_fixed_n(rho, lam, fading, err)
            tags = dict(fading=str(fading), err=str(err), snr_db=db)
            rows.append(CurvePoint(lam, fixed + gap, None, "quad", users=str(Poisson(lam)), **tags))
            rows.append(CurvePoint(lam, fixed, None, "quad", users=f"det:{lam:g}", **tags))
    return rows, scans


def diversity_rows(users_list, fading, err, snr_db, window, *, trials=0, seed=0, workers=1):
    rows = error_rate_rows(users_list, fading, err, snr_db, trials=trials, seed=seed,
                           workers=workers, closed=False, asymptote=True)
    slopes = {}
    for users in users_list:
        curve = [(r.x, r.value) for r in rows if r.method == "quad" and r.users == str(users)]
        slope = analysis.diversity_order_fit(curve, window)
        slopes[str(users)] = slope
        # annotation row: fitted slope over the window, x left empty
        rows.append(CurvePoint(None, slope, None, "asymptote", str(users), str(fading), str(err),
                               f"{window[0]:g}:{window[1]:g}"))
    return rows, slopes


def gumbel_rows(lam_grid, fading, *, trials, seed, workers=1):
    cfg = SimConfig(int(trials), int(seed), int(workers))
    return [CurvePoint(lam, montecarlo.mc_gumbel_ks(lam, fading, cfg), None, "mc",
                       str(Poisson(lam)), str(fading), "", "")
            for lam in lam_grid]


def fmt_num(v) -> str:
    if v is None or v == "":
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if math.isnan(v):
        return "nan"
    return format(float(v), ".17g")

