"""Command-line interface.

Every command reads or writes plain files: series as one-column CSV,
structured results as JSON. Output goes to ``--out`` (written to a
temporary file and renamed, so a failed run leaves nothing behind) or to
standard output.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass

import numpy as np

from . import __version__
from .bootstrap import (
    BootstrapError,
    ci_boot_se,
    ci_boot_t,
    ci_percentile,
    ci_unbiased_centered,
    run_bootstrap,
)
from .diagnostics import sample_acf, sample_pacf, select_order, standardized_residuals
from .estimation import EstimationError, asymptotic_ci, fit
from .forecast import accuracy, forecast
from .links import LinkKind
from .model import BoundedSeries, ModelOrder, ParamVector, mean_recursion, simulate
from .montecarlo import DEFAULT_SIZES, PRESETS, StudyConfig, emit_tables, load_config, preset_scenarios, run_study
from .special import DomainError, RngStream

__all__ = ["RunConfig", "ingest_csv", "main"]

COMMANDS = ("fit", "bootstrap", "forecast", "simulate", "select", "mc-study", "diagnose")


class CliError(Exception):
    """User-facing failure; reported on stderr with exit code 1."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    input_path: str | None = None
    output_path: str | None = None
    link: LinkKind = LinkKind.LOGIT
    order: ModelOrder | None = None
    B: int = 1000
    level: float = 0.95
    horizon: int = 6
    seed: int = 0
    holdout: int | None = None

    _NEEDS_INPUT = ("fit", "bootstrap", "forecast", "select", "diagnose")
    _NEEDS_ORDER = ("fit", "bootstrap", "forecast", "diagnose")

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise CliError(f"unknown command {self.command!r}")
        if self.command in self._NEEDS_INPUT and not self.input_path:
            raise CliError(f"{self.command} needs --input")
        if self.command in self._NEEDS_ORDER and self.order is None:
            raise CliError(f"{self.command} needs --order P,Q")
        if not 0.5 < self.level < 1.0:
            raise CliError("--level must lie in (0.5, 1)")
        if self.B < 2:
            raise CliError("-B must be at least 2")
        if self.horizon < 1:
            raise CliError("--horizon must be positive")
        if self.holdout is not None and self.holdout < 2:
            raise CliError("--holdout must be at least 2")
        if not 0 <= self.seed < 2**64:
            raise CliError("--seed must be a non-negative 64-bit integer")


# --------------------------------------------------------------------------
# input / output
# --------------------------------------------------------------------------

def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def ingest_csv(path, percent: bool = False, notices=None) -> BoundedSeries:
    """Read a series from a CSV file.

    The file holds one numeric column, optionally preceded by a header row
    and optionally by a date (or any label) column, which is ignored.
    With ``percent=True`` every value is divided by 100. Values must then
    lie strictly inside (0, 1).
    """
    notices = notices if notices is not None else sys.stderr
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise CliError(f"{path}: file is empty")
    width = len(rows[0])
    if width > 2:
        raise CliError(f"{path}: expected one value column (optionally after a date column), got {width}")
    start = 0
    if not _is_number(rows[0][-1].strip()):
        start = 1
    if width == 2:
        print(f"note: ignoring first column of {path}", file=notices)
    values = []
    for lineno, row in enumerate(rows[start:], start=start + 1):
        if len(row) != width:
            raise CliError(f"{path}: row {lineno} has {len(row)} columns, expected {width}")
        cell = row[-1].strip()
        try:
            v = float(cell)
        except ValueError:
            raise CliError(f"{path}: row {lineno}: non-numeric value {cell!r}") from None
        values.append(v)
    if not values:
        raise CliError(f"{path}: no data rows")
    arr = np.array(values)
    if percent:
        arr = arr / 100.0
    bad = np.flatnonzero(~((arr > 0) & (arr < 1)))
    if bad.size:
        rows_bad = ", ".join(str(i + start + 1) for i in bad[:10])
        hint = "" if percent else " (use --percent for values in percent)"
        raise CliError(f"{path}: values outside (0, 1) at rows {rows_bad}{hint}")
    return BoundedSeries(arr)


def _write_output(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".betarma-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False, default=_json_default) + "\n"


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _finite(v):
    return None if v is None or not math.isfinite(v) else v


def _intervals(cis) -> list[dict]:
    return [{"param": ci.param, "lower": ci.lower, "upper": ci.upper} for ci in cis]


def _series_csv(values) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["y"])
    w.writerows([repr(float(v))] for v in values)
    return buf.getvalue()


def _parse_order(text: str) -> ModelOrder:
    try:
        p, q = (int(s) for s in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"order must look like P,Q, got {text!r}") from None
    try:
        return ModelOrder(p, q)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _parse_floats(text: str) -> tuple[float, ...]:
    if not text.strip():
        return ()
    try:
        return tuple(float(s) for s in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _parse_ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(s) for s in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def _fit_checked(order, link, y):
    rep = fit(order, link, y)
    if not rep.converged:
        raise CliError(f"fit did not converge: {rep.message}")
    return rep


def cmd_fit(cfg: RunConfig, args) -> str:
    y = ingest_csv(cfg.input_path, args.percent)
    rep = fit(cfg.order, cfg.link, y)
    doc = rep.to_dict()
    doc["grad_norm"] = _finite(doc["grad_norm"])
    doc["level"] = cfg.level
    doc["intervals"] = _intervals(asymptotic_ci(rep, cfg.level)) if rep.converged else None
    return _json(doc)


def cmd_bootstrap(cfg: RunConfig, args) -> str:
    y = ingest_csv(cfg.input_path, args.percent)
    rep = _fit_checked(cfg.order, cfg.link, y)
    boot = run_bootstrap(cfg.order, cfg.link, y, rep, cfg.B, RngStream(cfg.seed))
    families = {
        "asymptotic": asymptotic_ci(rep, cfg.level),
        "boot_se": ci_boot_se(rep, boot, cfg.level),
        "boot_t": ci_boot_t(rep, boot, cfg.level),
        "percentile": ci_percentile(boot, cfg.level),
        "unbiased_centered": ci_unbiased_centered(rep, boot, cfg.level),
    }
    names = cfg.order.coord_names()
    mle = rep.estimate.to_array()
    corr = boot.corrected.to_array()
    table = []
    for r, name in enumerate(names):
        row = {"param": name, "mle": mle[r], "corrected": corr[r], "se_boot": boot.se_boot[r]}
        for fam, cis in families.items():
            row[f"{fam}_lower"] = cis[r].lower
            row[f"{fam}_upper"] = cis[r].upper
        table.append(row)
    doc = {
        "fit": rep.to_dict(),
        "bootstrap": boot.to_dict(include_replicates=args.replicates),
        "level": cfg.level,
        "seed": cfg.seed,
        "table": table,
    }
    return _json(doc)


def cmd_forecast(cfg: RunConfig, args) -> str:
    y = ingest_csv(cfg.input_path, args.percent)
    observed = None
    H = cfg.horizon
    if cfg.holdout is not None:
        H = cfg.holdout
        if y.n - H <= cfg.order.m + cfg.order.p + 1:
            raise CliError(f"holdout of {H} leaves too few observations to fit")
        observed = y.values[y.n - H:]
        y = BoundedSeries(y.values[:y.n - H])
    rep = _fit_checked(cfg.order, cfg.link, y)
    path = mean_recursion(cfg.order, rep.estimate, cfg.link, y)
    fc = forecast(cfg.order, rep.estimate, cfg.link, y, path, H)
    doc = fc.to_dict()
    doc["n_fit"] = y.n
    doc["fit"] = rep.to_dict()
    if observed is not None:
        mse, mape, mase = accuracy(observed, fc.mu_hat)
        doc["observed"] = observed.tolist()
        doc["metrics"] = {"mse": mse, "mape": mape, "mase": mase}
    return _json(doc)


def cmd_simulate(cfg: RunConfig, args) -> str:
    if args.precision is None or args.alpha is None:
        raise CliError("simulate needs --alpha and --precision (plus --ar and/or --ma)")
    params = ParamVector(args.alpha, args.ar, args.ma, args.precision)
    order = params.order
    if cfg.order is not None and cfg.order != order:
        raise CliError(f"--order {cfg.order.p},{cfg.order.q} disagrees with the --ar/--ma lengths")
    y = simulate(order, params, cfg.link, args.n, burn_in=args.burn_in, rng=RngStream(cfg.seed))
    return _series_csv(y.values)


def cmd_select(cfg: RunConfig, args) -> str:
    y = ingest_csv(cfg.input_path, args.percent)
    res = select_order(cfg.link, y, args.p_max, args.q_max)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["p", "q", "aic", "converged"])
    for p, q, aic, conv in res.grid_rows():
        w.writerow([p, q, "" if math.isnan(aic) else repr(aic), str(conv).lower()])
    if args.grid_out:
        _write_output(buf.getvalue(), args.grid_out)
    else:
        sys.stdout.write(buf.getvalue())
    doc = {
        "best": {"p": res.best.p, "q": res.best.q, "aic": res.best_fit.aic},
        "fit": res.best_fit.to_dict(),
        "grid": [{"p": c.p, "q": c.q, "aic": _finite(c.aic), "converged": c.converged}
                 for c in res.grid],
    }
    return _json(doc)


def cmd_mc(cfg: RunConfig, args) -> str:
    if (args.preset is None) == (args.config is None):
        raise CliError("mc-study needs exactly one of --preset or --config")
    if args.config is not None:
        study = load_config(args.config)
        over = {}
        if args.n_mc is not None:
            over["n_mc"] = args.n_mc
        if args.n_boot is not None:
            over["n_boot"] = args.n_boot
        if args.seed_given:
            over["seed"] = cfg.seed
        if args.level_given:
            over["level"] = cfg.level
        study = dataclasses.replace(study, **over)
    else:
        if args.preset not in PRESETS:
            raise CliError(f"unknown preset {args.preset!r}; available: {', '.join(PRESETS)}")
        sizes = args.sizes or DEFAULT_SIZES
        names = args.scenarios.split(",") if args.scenarios else None
        scenarios = preset_scenarios(args.preset, sizes, names, cfg.link)
        if not scenarios:
            raise CliError("no scenarios selected")
        study = StudyConfig(scenarios, n_mc=args.n_mc or 1000, n_boot=args.n_boot or 1000,
                            level=cfg.level, seed=cfg.seed)
    study = dataclasses.replace(study, workers=args.workers)
    results = run_study(study)
    return emit_tables(results, args.format, study)


def cmd_diagnose(cfg: RunConfig, args) -> str:
    y = ingest_csv(cfg.input_path, args.percent)
    rep = _fit_checked(cfg.order, cfg.link, y)
    path = mean_recursion(cfg.order, rep.estimate, cfg.link, y)
    z = standardized_residuals(rep, path)
    max_lag = min(args.max_lag, z.size - 1)
    acf = sample_acf(z, max_lag)
    pacf = sample_pacf(z, max_lag)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["series", "index", "value"])
    for t in range(path.m, y.n):
        w.writerow(["mu_hat", t + 1, repr(float(path.mu[t]))])
    for i, v in enumerate(z):
        w.writerow(["std_resid", path.m + i + 1, repr(float(v))])
    for lag, v in enumerate(acf, start=1):
        w.writerow(["acf", lag, repr(float(v))])
    for lag, v in enumerate(pacf, start=1):
        w.writerow(["pacf", lag, repr(float(v))])
    return buf.getvalue()


_HANDLERS = {
    "fit": cmd_fit,
    "bootstrap": cmd_bootstrap,
    "forecast": cmd_forecast,
    "simulate": cmd_simulate,
    "select": cmd_select,
    "mc-study": cmd_mc,
    "diagnose": cmd_diagnose,
}


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="betarma", description="Beta ARMA models for series on the unit interval.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", dest="output_path", help="output file (default: standard output)")
    common.add_argument("--link", default="logit", choices=[k.value for k in LinkKind])
    common.add_argument("--seed", type=int, default=None, help="random seed (default 0)")
    common.add_argument("--level", type=float, default=None, help="interval level (default 0.95)")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--input", dest="input_path", required=True, help="CSV series")
    data.add_argument("--percent", action="store_true", help="input values are percentages")

    ordered = argparse.ArgumentParser(add_help=False)
    ordered.add_argument("--order", type=_parse_order, required=True, metavar="P,Q")

    sub.add_parser("fit", parents=[common, data, ordered], help="maximum likelihood fit")

    p = sub.add_parser("bootstrap", parents=[common, data, ordered],
                       help="bias-corrected estimates and bootstrap intervals")
    p.add_argument("-B", type=int, default=1000, help="bootstrap replicates (default 1000)")
    p.add_argument("--replicates", action="store_true", help="include every replicate in the output")

    p = sub.add_parser("forecast", parents=[common, data, ordered], help="mean forecasts")
    p.add_argument("--horizon", type=int, default=6)
    p.add_argument("--holdout", type=int, default=None,
                   help="reserve the last H observations and score the forecasts against them")

    p = sub.add_parser("simulate", parents=[common], help="simulate a series")
    p.add_argument("--order", type=_parse_order, default=None, metavar="P,Q",
                   help="optional check against the --ar/--ma lengths")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--ar", type=_parse_floats, default=())
    p.add_argument("--ma", type=_parse_floats, default=())
    p.add_argument("--precision", type=float, default=None)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--burn-in", type=int, default=None)

    p = sub.add_parser("select", parents=[common, data], help="AIC order search")
    p.add_argument("--p-max", type=int, default=6)
    p.add_argument("--q-max", type=int, default=6)
    p.add_argument("--grid-out", default=None, help="write the grid CSV here")

    p = sub.add_parser("mc-study", parents=[common], help="Monte Carlo study")
    p.add_argument("--preset", default=None, help=f"built-in design ({', '.join(PRESETS)})")
    p.add_argument("--config", default=None, help="JSON study description")
    p.add_argument("--scenarios", default=None, help="comma-separated preset model names")
    p.add_argument("--n-mc", type=int, default=None)
    p.add_argument("--n-boot", type=int, default=None)
    p.add_argument("--sizes", type=_parse_ints, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("diagnose", parents=[common, data, ordered],
                       help="fitted means, standardized residuals, ACF and PACF")
    p.add_argument("--max-lag", type=int, default=20)
    return parser


def _config_from_args(args) -> RunConfig:
    return RunConfig(
        command=args.command,
        input_path=getattr(args, "input_path", None),
        output_path=args.output_path,
        link=LinkKind.parse(args.link),
        order=getattr(args, "order", None),
        B=getattr(args, "B", 1000),
        level=0.95 if args.level is None else args.level,
        horizon=getattr(args, "horizon", 6),
        seed=0 if args.seed is None else args.seed,
        holdout=getattr(args, "holdout", None),
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.seed_given = args.seed is not None
    args.level_given = args.level is not None
    try:
        cfg = _config_from_args(args)
        cfg.validate()
        text = _HANDLERS[cfg.command](cfg, args)
        _write_output(text, cfg.output_path)
    except (CliError, DomainError, EstimationError, BootstrapError, ValueError, OSError) as exc:
        print(f"betarma {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
