"""Monte Carlo study of corrected and uncorrected beta ARMA inference.

For every scenario and replication a series is simulated, fitted and
bootstrapped. The harness records point estimates (maximum likelihood and
bootstrap bias-corrected) and whether each of the five interval families
covers the true parameter, then aggregates mean / bias / relative bias /
SE / MSE and coverage rates.

Replication ``r`` of scenario ``s`` draws only from the substream
``(seed, s, r)``, so results do not depend on worker scheduling.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bootstrap import (
    BootstrapError,
    ci_boot_se,
    ci_boot_t,
    ci_percentile,
    ci_unbiased_centered,
    run_bootstrap,
)
from .estimation import CI_KINDS, EstimationError, asymptotic_ci, fit
from .links import LinkKind
from .model import ModelOrder, ParamVector, _hits_clamp, simulate
from .special import RngStream

__all__ = [
    "CoverageMetrics",
    "PointMetrics",
    "Scenario",
    "ScenarioResult",
    "StudyConfig",
    "emit_tables",
    "load_config",
    "preset_scenarios",
    "results_from_json",
    "run_study",
]

logger = logging.getLogger(__name__)

ESTIMATORS = ("uncorrected", "corrected")
METRICS = ("mean", "bias", "rb", "se", "mse")
MAX_FAILURE_RATE = 0.2


@dataclass(frozen=True)
class Scenario:
    order: ModelOrder
    truth: ParamVector
    link: LinkKind
    n: int
    name: str

    def __post_init__(self):
        if self.truth.order != self.order:
            raise ValueError(f"{self.name}: truth does not match order {self.order}")
        if self.n < self.order.m + self.order.p + 2:
            raise ValueError(f"{self.name}: n = {self.n} too small")

    @property
    def label(self) -> str:
        return f"{self.name}/n={self.n}"


@dataclass(frozen=True)
class StudyConfig:
    scenarios: tuple[Scenario, ...]
    n_mc: int = 1000
    n_boot: int = 1000
    level: float = 0.95
    seed: int = 0
    workers: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "scenarios", tuple(self.scenarios))
        if self.n_mc < 1:
            raise ValueError("n_mc must be at least 1")
        if self.n_boot < 2:
            raise ValueError("n_boot must be at least 2")
        if not 0.5 < self.level < 1.0:
            raise ValueError("level must lie in (0.5, 1)")
        need = math.ceil((2.0 / (1.0 - self.level)) - 1e-9)
        if self.n_boot < need:
            raise ValueError(f"n_boot must be at least {need} for {self.level:.0%} percentile intervals")
        labels = [s.label for s in self.scenarios]
        if len(set(labels)) != len(labels):
            raise ValueError("scenario labels must be unique")


@dataclass
class PointMetrics:
    names: list[str]
    truth: np.ndarray
    # estimator -> metric -> per-coordinate array
    values: dict[str, dict[str, np.ndarray]]
    total_rb: dict[str, float]

    @classmethod
    def from_estimates(cls, names, truth, estimates: dict[str, np.ndarray]) -> "PointMetrics":
        values, total = {}, {}
        for kind, est in estimates.items():
            R = est.shape[0]
            mean = est.mean(axis=0)
            bias = mean - truth
            with np.errstate(divide="ignore", invalid="ignore"):
                rb = np.where(truth != 0, 100.0 * bias / truth, np.nan)
            # population SD so that mse = se**2 + bias**2 exactly
            se = est.std(axis=0) if R > 1 else np.full(len(truth), np.nan)
            mse = ((est - truth) ** 2).mean(axis=0)
            values[kind] = {"mean": mean, "bias": bias, "rb": rb, "se": se, "mse": mse}
            total[kind] = float(np.nansum(np.abs(rb)))
        return cls(list(names), np.asarray(truth, dtype=float), values, total)


@dataclass
class CoverageMetrics:
    names: list[str]
    cr: dict[str, np.ndarray]
    acr: dict[str, float]

    @classmethod
    def from_hits(cls, names, hits: dict[str, np.ndarray]) -> "CoverageMetrics":
        cr = {fam: h.mean(axis=0) for fam, h in hits.items()}
        return cls(list(names), cr, {fam: float(v.mean()) for fam, v in cr.items()})


@dataclass
class ScenarioResult:
    scenario: Scenario
    point: PointMetrics | None
    coverage: CoverageMetrics | None
    n_used: int
    n_dropped: int
    invalid: bool
    # per-replication arrays, not serialized
    estimates: np.ndarray | None = field(default=None, repr=False)
    corrected: np.ndarray | None = field(default=None, repr=False)
    mean_star: np.ndarray | None = field(default=None, repr=False)


# --------------------------------------------------------------------------
# presets and configuration
# --------------------------------------------------------------------------

DEFAULT_SIZES = (20, 30, 50, 100)

_STUDY_MODELS = (
    ("bar1_phi20", 1, 0, 1.0, (-0.5,), (), 20.0),
    ("bar1_phi120", 1, 0, 1.0, (-0.5,), (), 120.0),
    ("bma1_phi20", 0, 1, -1.0, (), (1.0,), 20.0),
    ("bma1_phi120", 0, 1, 1.0, (), (-0.5,), 120.0),
    ("barma11_phi20", 1, 1, -0.5, (0.5,), (1.0,), 20.0),
    ("barma11_phi120", 1, 1, 1.0, (0.5,), (-1.5,), 120.0),
)

PRESETS = {"paper-s4": _STUDY_MODELS}


def preset_scenarios(preset="paper-s4", sizes=DEFAULT_SIZES, names=None,
                     link="logit") -> list[Scenario]:
    """Scenarios of a built-in design crossed with ``sizes``.

    ``"paper-s4"`` holds six models: beta AR(1), MA(1) and ARMA(1, 1), each
    with precision 20 and 120. ``names`` restricts the selection.
    """
    if preset not in PRESETS:
        raise ValueError(f"unknown preset {preset!r}; available: {', '.join(PRESETS)}")
    link = LinkKind.parse(link)
    out = []
    for name, p, q, alpha, ar, ma, prec in PRESETS[preset]:
        if names is not None and name not in names:
            continue
        for n in sizes:
            out.append(Scenario(ModelOrder(p, q), ParamVector(alpha, ar, ma, prec), link, int(n), name))
    return out


def _scenario_from_dict(d: dict, default_sizes) -> list[Scenario]:
    ar = tuple(d.get("ar", ()))
    ma = tuple(d.get("ma", ()))
    order = ModelOrder(len(ar), len(ma))
    truth = ParamVector(d["alpha"], ar, ma, d["precision"])
    link = LinkKind.parse(d.get("link", "logit"))
    sizes = d.get("sizes", default_sizes)
    name = d.get("name") or f"barma{order.p}{order.q}"
    return [Scenario(order, truth, link, int(n), name) for n in sizes]


def load_config(path) -> StudyConfig:
    """Read a JSON study description.

    ``{"scenarios": [{"name", "alpha", "ar", "ma", "precision", "link",
    "sizes"}...], "sizes", "n_mc", "n_boot", "level", "seed"}``; a
    ``"preset"`` key may replace or extend the scenario list.
    """
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    sizes = doc.get("sizes", DEFAULT_SIZES)
    scenarios = []
    if "preset" in doc:
        if doc["preset"] not in PRESETS:
            raise ValueError(f"unknown preset {doc['preset']!r}")
        scenarios.extend(preset_scenarios(doc["preset"], sizes))
    for entry in doc.get("scenarios", []):
        scenarios.extend(_scenario_from_dict(entry, sizes))
    if not scenarios:
        raise ValueError("study configuration lists no scenarios")
    return StudyConfig(
        scenarios=tuple(scenarios),
        n_mc=int(doc.get("n_mc", 1000)),
        n_boot=int(doc.get("n_boot", 1000)),
        level=float(doc.get("level", 0.95)),
        seed=int(doc.get("seed", 0)),
    )


# --------------------------------------------------------------------------
# running
# --------------------------------------------------------------------------

def _replication(task):
    """One Monte Carlo replication; returns None when it must be dropped."""
    scen, s_idx, r, seed, n_boot, level = task
    rng = RngStream(seed).substream(s_idx, r)
    y = simulate(scen.order, scen.truth, scen.link, scen.n, rng=rng.substream(0))
    if _hits_clamp(y.values):
        return None
    try:
        rep = fit(scen.order, scen.link, y)
    except EstimationError:
        return None
    if not rep.converged:
        return None
    try:
        boot = run_bootstrap(scen.order, scen.link, y, rep, n_boot, rng.substream(1))
        families = {
            "asymptotic": asymptotic_ci(rep, level),
            "boot_se": ci_boot_se(rep, boot, level),
            "boot_t": ci_boot_t(rep, boot, level),
            "percentile": ci_percentile(boot, level),
            "unbiased_centered": ci_unbiased_centered(rep, boot, level),
        }
    except (BootstrapError, EstimationError):
        # includes too few surviving replicates for the percentile ranks
        return None
    truth = scen.truth.to_array()
    hits = {fam: np.array([ci.contains(v) for ci, v in zip(cis, truth)])
            for fam, cis in families.items()}
    est = rep.estimate.to_array()
    return est, 2.0 * est - boot.mean_star, boot.mean_star, hits


def _worker_count(requested):
    cap = os.environ.get("BETARMA_THREADS")
    n = requested if requested is not None else (os.cpu_count() or 1)
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


def run_study(cfg: StudyConfig) -> list[ScenarioResult]:
    """Run every scenario of ``cfg``; see the module docstring."""
    workers = _worker_count(cfg.workers)
    results = []
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        for s_idx, scen in enumerate(cfg.scenarios):
            tasks = [(scen, s_idx, r, cfg.seed, cfg.n_boot, cfg.level) for r in range(cfg.n_mc)]
            if pool is None:
                outs = [_replication(t) for t in tasks]
            else:
                outs = list(pool.map(_replication, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
            results.append(_aggregate(scen, outs, cfg.n_mc))
            logger.info("%s: %d used, %d dropped", scen.label, results[-1].n_used, results[-1].n_dropped)
    finally:
        if pool is not None:
            pool.shutdown()
    return results


def _aggregate(scen: Scenario, outs, n_mc) -> ScenarioResult:
    kept = [o for o in outs if o is not None]
    dropped = n_mc - len(kept)
    invalid = dropped > MAX_FAILURE_RATE * n_mc
    names = scen.order.coord_names()
    if not kept:
        return ScenarioResult(scen, None, None, 0, dropped, True)
    est = np.array([o[0] for o in kept])
    corr = np.array([o[1] for o in kept])
    mstar = np.array([o[2] for o in kept])
    hits = {fam: np.array([o[3][fam] for o in kept]) for fam in CI_KINDS}
    truth = scen.truth.to_array()
    point = PointMetrics.from_estimates(names, truth, {"uncorrected": est, "corrected": corr})
    cov = CoverageMetrics.from_hits(names, hits)
    return ScenarioResult(scen, point, cov, len(kept), dropped, invalid, est, corr, mstar)


# --------------------------------------------------------------------------
# reporting
# --------------------------------------------------------------------------

def _num(x):
    x = float(x)
    return None if math.isnan(x) else x


def _arr(a):
    return [_num(v) for v in a]


def _scenario_dict(res: ScenarioResult) -> dict:
    sc = res.scenario
    t = sc.truth
    out = {
        "name": sc.name,
        "label": sc.label,
        "n": sc.n,
        "p": sc.order.p,
        "q": sc.order.q,
        "link": sc.link.value,
        "truth": {"alpha": t.alpha, "ar": list(t.ar), "ma": list(t.ma), "precision": t.precision},
        "n_used": res.n_used,
        "n_dropped": res.n_dropped,
        "invalid": res.invalid,
        "point": None,
        "coverage": None,
    }
    if res.point is not None:
        out["point"] = {
            "names": res.point.names,
            "truth": _arr(res.point.truth),
            "total_rb": {k: _num(v) for k, v in res.point.total_rb.items()},
            **{kind: {m: _arr(res.point.values[kind][m]) for m in METRICS} for kind in ESTIMATORS},
        }
    if res.coverage is not None:
        out["coverage"] = {
            "names": res.coverage.names,
            "cr": {fam: _arr(v) for fam, v in res.coverage.cr.items()},
            "acr": {fam: _num(v) for fam, v in res.coverage.acr.items()},
        }
    return out


def _nan(a):
    return np.array([np.nan if v is None else v for v in a], dtype=float)


def _result_from_dict(d: dict) -> ScenarioResult:
    tr = d["truth"]
    order = ModelOrder(d["p"], d["q"])
    scen = Scenario(order, ParamVector(tr["alpha"], tr["ar"], tr["ma"], tr["precision"]),
                    LinkKind.parse(d["link"]), d["n"], d["name"])
    point = cov = None
    if d["point"] is not None:
        pt = d["point"]
        values = {kind: {m: _nan(pt[kind][m]) for m in METRICS} for kind in ESTIMATORS}
        total = {k: (np.nan if v is None else v) for k, v in pt["total_rb"].items()}
        point = PointMetrics(pt["names"], _nan(pt["truth"]), values, total)
    if d["coverage"] is not None:
        cv = d["coverage"]
        cov = CoverageMetrics(cv["names"], {f: _nan(v) for f, v in cv["cr"].items()},
                              {f: (np.nan if v is None else v) for f, v in cv["acr"].items()})
    return ScenarioResult(scen, point, cov, d["n_used"], d["n_dropped"], d["invalid"])


def results_from_json(text: str) -> list[ScenarioResult]:
    return [_result_from_dict(d) for d in json.loads(text)["scenarios"]]


def _point_rows(res: ScenarioResult):
    names = res.point.names
    for m in METRICS:
        row = [res.scenario.name, res.scenario.n, m.upper() if m in ("rb", "se", "mse") else m.capitalize()]
        for r in range(len(names)):
            for kind in ESTIMATORS:
                row.append(_fmt(res.point.values[kind][m][r]))
        yield row


def _fmt(v):
    v = float(v)
    return "" if math.isnan(v) else repr(v)


def _point_header(names):
    cols = ["scenario", "n", "measure"]
    for nm in names:
        cols += [f"{nm}_hat", f"{nm}_bar"]
    return cols


def emit_tables(results: list[ScenarioResult], fmt: str = "json", config: StudyConfig | None = None) -> str:
    """Serialize study results.

    ``json`` gives one document with every scenario. ``csv`` gives, for
    each model, a point-estimate block (rows Mean/Bias/RB/SE/MSE per sample
    size, columns paired as estimate/corrected per coordinate) followed by a
    coverage block (one row per interval family with per-coordinate CR and
    the ACR). Blocks are separated by a blank line.
    """
    if fmt == "json":
        doc = {"scenarios": [_scenario_dict(r) for r in results]}
        if config is not None:
            doc["config"] = {"n_mc": config.n_mc, "n_boot": config.n_boot,
                             "level": config.level, "seed": config.seed}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if not results:
        w.writerow(["scenario", "n", "measure"])
        return buf.getvalue()
    groups: dict[str, list[ScenarioResult]] = {}
    for res in results:
        groups.setdefault(res.scenario.name, []).append(res)
    first = True
    for name, group in groups.items():
        usable = [r for r in group if r.point is not None]
        names = group[0].scenario.order.coord_names()
        if not first:
            buf.write("\n")
        first = False
        w.writerow(_point_header(names))
        for res in usable:
            w.writerows(_point_rows(res))
        buf.write("\n")
        w.writerow(["scenario", "n", "interval"] + [f"CR_{nm}" for nm in names] + ["ACR", "n_used", "n_dropped"])
        for res in group:
            if res.coverage is None:
                continue
            for fam in CI_KINDS:
                w.writerow([name, res.scenario.n, fam] + [_fmt(v) for v in res.coverage.cr[fam]]
                           + [_fmt(res.coverage.acr[fam]), res.n_used, res.n_dropped])
    return buf.getvalue()
