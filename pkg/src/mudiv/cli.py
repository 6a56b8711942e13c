"""Command-line experiment runner.

    mudiv error-rate --users poisson:4 --users det:4 --snr-db 0:2:20 --mc-trials 1e6
    mudiv figure 6 --out fig6.csv

Every command writes CSV rows ``x,value,stderr,method,users,fading,err,snr_db``
(capacity rows leave ``err`` empty).  A flat ``key = value`` config file can be
given with ``--config``; flags override it.  Exit status: 0 success, 2 bad
configuration, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass, field, fields

import numpy as np

from . import analysis, experiments as ex, figures
from .analysis import NumericalInstabilityError
from .fading import parse_fading
from .metrics import parse_error_model
from .numerics import DomainError, QuadratureError
from .usercount import Poisson, parse_users

COMMANDS = ("error-rate", "capacity", "outage", "order", "cm-check", "jensen", "diversity",
            "gumbel", "figure")


class ConfigError(ValueError):
    pass


def _default_seed():
    try:
        return int(os.environ.get("MUDIV_SEED", "0"))
    except ValueError:
        return 0


def parse_range(text: str) -> list[float]:
    """``start:step:stop`` (stop inclusive), a comma list, or a single value."""
    text = str(text).strip()
    try:
        if ":" in text:
            start, step, stop = (float(v) for v in text.split(":"))
            if step <= 0 or stop < start:
                raise ConfigError(f"bad range {text!r}")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            return [round(start + i * step, 12) for i in range(count)]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad numeric list {text!r}: {exc}") from None


def _nonneg(val: int, text) -> int:
    if val < 0:
        raise ConfigError(f"expected a non-negative integer, got {text!r}")
    return val


def _count(text) -> int:
    # accepts "1e6"
    try:
        return _nonneg(int(str(text).strip()), text)
    except ValueError:
        pass
    val = float(text)
    if val != int(val) or val < 0:
        raise ConfigError(f"expected a non-negative integer, got {text!r}")
    return int(val)


@dataclass
class ExperimentConfig:
    command: str = "error-rate"
    fading: str = "rayleigh"
    users: list = field(default_factory=lambda: ["poisson:4"])
    err: str = "exp:a=1,eta=1"
    snr_db: str = "0:2:20"
    lambda_grid: str = "2,4,8,16,32,64"
    x_grid: str = "0:0.5:8"
    trials: int = 0
    seed: int = field(default_factory=_default_seed)
    workers: int = 1
    out: str = "-"
    window: str = "35:45"
    n_max: int = 40
    order: int = 4
    figure: int = 0
    explicit: set = field(default_factory=set, repr=False, compare=False)

    KEYS = ("command", "fading", "users", "err", "snr_db", "lambda_grid", "x_grid", "trials",
            "seed", "workers", "out", "window", "n_max", "order", "figure")
    ALIASES = {"mc_trials": "trials", "lambda": "lambda_grid", "snr": "snr_db"}

    def set(self, key: str, value):
        key = key.strip().replace("-", "_")
        key = self.ALIASES.get(key, key)
        if key not in self.KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        if key == "users":
            value = [value] if isinstance(value, str) else list(value)
            if "users" in self.explicit:
                value = self.users + value
        elif key in ("trials", "seed", "workers", "n_max", "order", "figure"):
            try:
                value = _count(value)
            except ValueError:
                raise ConfigError(f"{key} must be an integer, got {value!r}") from None
            if key == "workers" and value < 1:
                raise ConfigError("workers must be >= 1")
            if key == "seed" and value >= 2**64:
                raise ConfigError("seed must fit in 64 bits")
        elif key == "command" and value not in COMMANDS:
            raise ConfigError(f"unknown command {value!r}")
        else:
            value = str(value).strip()
        setattr(self, key, value)
        self.explicit.add(key)

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        cfg = cls()
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, eq, value = line.partition("=")
            if not eq:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
            cfg.set(key, value.strip())
        return cfg

    def to_text(self) -> str:
        lines = []
        for key in self.KEYS:
            val = getattr(self, key)
            if key == "users":
                lines.extend(f"users = {u}" for u in val)
            else:
                lines.append(f"{key} = {val}")
        return "\n".join(lines) + "\n"

    def overrides(self) -> dict:
        """Explicitly set fields in the parsed form used by figure recipes."""
        out = {}
        for key in self.explicit:
            val = getattr(self, key)
            if key in ("snr_db", "lambda_grid", "x_grid"):
                out[key] = parse_range(val)
            elif key == "window":
                out[key] = tuple(parse_range(val.replace(":", ",")))
            elif key in ("fading", "err", "users", "trials"):
                out[key] = val
        return out

    def __eq__(self, other):
        if not isinstance(other, ExperimentConfig):
            return NotImplemented
        return all(getattr(self, k) == getattr(other, k) for k in self.KEYS)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mudiv", description="Best-user selection metrics when the user count is random.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("figure", nargs="?", type=int, help="figure number (figure command only)")
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--fading", help="rayleigh | nakagami:m=<v> | rician:k=<v>")
    parser.add_argument("--users", action="append", help="det:<N> | poisson:<lam> | geom:<p> | ztpoisson:<lam> (repeatable)")
    parser.add_argument("--err", help="exp:a=<alpha>,eta=<eta> | qf:a=<alpha>,eta=<eta>")
    parser.add_argument("--snr-db", help="start:step:stop (dB, stop inclusive) or comma list")
    parser.add_argument("--lambda-grid", help="comma list or start:step:stop of mean user counts")
    parser.add_argument("--x-grid", help="gain thresholds for outage")
    parser.add_argument("--mc-trials", "--trials", dest="trials", help="Monte Carlo trials (0 disables)")
    parser.add_argument("--seed", help="64-bit seed (default $MUDIV_SEED or 0)")
    parser.add_argument("--workers")
    parser.add_argument("--out", help="CSV path, '-' for stdout")
    parser.add_argument("--window", help="dB window for the diversity fit, start:stop")
    parser.add_argument("--n-max", help="largest N for cm-check")
    parser.add_argument("--order", help="highest difference order for cm-check")
    return parser


def load_config(argv) -> ExperimentConfig:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = ExperimentConfig.from_text(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
    else:
        cfg = ExperimentConfig()
    cfg.set("command", args.command)
    if args.figure is not None:
        cfg.set("figure", args.figure)
    for key in ("fading", "err", "snr_db", "lambda_grid", "x_grid", "trials", "seed", "workers",
                "out", "window", "n_max", "order"):
        val = getattr(args, key)
        if val is not None:
            cfg.set(key, val)
    if args.users:
        # flags replace file-provided populations
        cfg.explicit.discard("users")
        cfg.set("users", args.users)
    if cfg.command == "figure" and cfg.figure not in range(1, 8):
        raise ConfigError("figure command needs a figure number 1..7")
    return cfg


def write_csv(rows, stream):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(ex.CSV_HEADER)
    for r in rows:
        writer.writerow([ex.fmt_num(r.x), ex.fmt_num(r.value), ex.fmt_num(r.stderr), r.method,
                         r.users, r.fading, r.err, ex.fmt_num(r.snr_db)])


def _models(cfg):
    try:
        return (parse_fading(cfg.fading), [parse_users(u) for u in cfg.users],
                parse_error_model(cfg.err))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def run(cfg: ExperimentConfig) -> tuple[list, dict]:
    """Execute one command; returns CSV rows and a JSON-able summary."""
    fading, users, err = _models(cfg)
    snr = parse_range(cfg.snr_db)
    mc = dict(trials=cfg.trials, seed=cfg.seed, workers=cfg.workers)
    summary: dict = {"command": cfg.command}
    cmd = cfg.command

    if cmd == "error-rate":
        rows = ex.error_rate_rows(users, fading, err, snr, **mc)
    elif cmd == "capacity":
        rows = ex.capacity_rows(users, fading, snr, **mc)
    elif cmd == "outage":
        rows = ex.outage_rows(users, fading, parse_range(cfg.x_grid), **mc)
    elif cmd == "order":
        if len(users) != 2:
            raise ConfigError("order needs exactly two --users")
        x, y = users
        verdict = analysis.lt_order_check(x, y)
        summary["verdict"] = {"X": str(x), "Y": str(y), "relation": verdict.relation.value,
                              "max_violation": verdict.max_violation, "grid_size": verdict.grid_size}
        rows = []
        if verdict.relation is not analysis.Relation.Incomparable:
            cons = analysis.ordering_consequences(x, y, fading, err, [ex.db_to_linear(d) for d in snr],
                                                  verdict=verdict)
            summary["consequences"] = []
            for db, c in zip(snr, cons):
                summary["consequences"].append({"snr_db": db, "error_x": c.error_x, "error_y": c.error_y,
                                                "capacity_x": c.capacity_x, "capacity_y": c.capacity_y,
                                                "holds": c.holds})
                for model, e, cap in ((x, c.error_x, c.capacity_x), (y, c.error_y, c.capacity_y)):
                    rows.append(ex.CurvePoint(db, e, None, "quad", str(model), str(fading), str(err), db))
                    rows.append(ex.CurvePoint(db, cap, None, "quad", str(model), str(fading), "", db))
            summary["consequences_hold"] = all(c.holds for c in cons)
    elif cmd == "cm-check":
        rows, seqs = ex.cm_rows(fading, err, snr, cfg.n_max)
        summary["reports"] = []
        for db, (pe, cap) in seqs.items():
            rep = analysis.check_cm(pe, cfg.order)
            rep_c = analysis.check_cmd(cap, max(cfg.order - 1, 0))
            summary["reports"].append({"snr_db": db, "error_cm": rep.passed,
                                       "error_first_violation": rep.first_violation,
                                       "capacity_cmd": rep_c.passed,
                                       "capacity_first_violation": rep_c.first_violation})
    elif cmd == "jensen":
        rows, scans = ex.jensen_rows(parse_range(cfg.lambda_grid), fading, err, snr)
        summary["scans"] = [{"snr_db": db, "lam": lam, "gap": g, "normalized_gap": ng}
                            for db, scan in scans.items() for lam, g, ng in scan]
    elif cmd == "diversity":
        snr_div = snr if "snr_db" in cfg.explicit else parse_range("20:1:45")
        window = tuple(parse_range(cfg.window.replace(":", ",")))
        rows, slopes = ex.diversity_rows(users, fading, err, snr_div, window, **mc)
        summary["slopes"] = slopes
    elif cmd == "gumbel":
        lams = [l for l in parse_range(cfg.lambda_grid) if l > 1]
        rows = ex.gumbel_rows(lams, fading, trials=cfg.trials or 100_000, seed=cfg.seed,
                              workers=cfg.workers)
        summary["ks"] = {r.x: r.value for r in rows}
    elif cmd == "figure":
        rows, fig_summary = figures.figure(cfg.figure, cfg)
        summary.update(fig_summary)
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown command {cmd!r}")
    return rows, summary


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return str(obj)


def main(argv=None) -> int:
    try:
        cfg = load_config(argv)
        rows, summary = run(cfg)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code or 0) and 2
    except ConfigError as exc:
        print(f"mudiv: configuration error: {exc}", file=sys.stderr)
        return 2
    except (QuadratureError, NumericalInstabilityError, DomainError, ArithmeticError) as exc:
        print(f"mudiv: numerical failure: {exc}", file=sys.stderr)
        return 3
    text = json.dumps(summary, indent=2, default=_json_default)
    if cfg.out == "-":
        write_csv(rows, sys.stdout)
        print(text, file=sys.stderr)
    else:
        with open(cfg.out, "w", newline="") as fh:
            write_csv(rows, fh)
        with open(cfg.out + ".json", "w") as fh:
            fh.write(text + "\n")
        print(text)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
