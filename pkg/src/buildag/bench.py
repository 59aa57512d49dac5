"""Seeded benchmark harness: ER DAGs, SEM data, BUILD variants, metric rows.

Trial ``t`` uses seed ``base_seed + t`` for both the graph and the data (on
separate generator streams), so any trial can be rerun on its own. The same
graph is shared across the sample-size sweep of a trial.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from .build import BuildConfig, run_build
from .dag import sample_er_dag
from .estimation import ORACLE, EstimatorSpec
from .exceptions import BuildDagError, ConfigError
from .metrics import evaluate
from .sem import NoiseModel, sample_data

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

CSV_COLUMNS = ["method", "m", "trial", "seed", "shd", "fdr", "tpr", "nmse",
               "runtime_s", "refresh_count", "incomplete", "failure"]
SUMMARY_METRICS = ["shd", "fdr", "tpr", "nmse", "runtime_s"]
SUMMARY_STATS = ["mean", "std", "median", "p10", "p90"]


@dataclass(frozen=True)
class MethodSpec:
    """A labelled BUILD variant; turned into a ``BuildConfig`` per trial.

    The oracle estimator needs the trial's ground truth, so configs are
    built lazily rather than stored.
    """

    label: str
    rho: float = 0.0
    estimator: str = "sample_inverse"
    ridge_lambda: Optional[float] = None
    eps_leaf: Optional[float] = None
    eps_edge: float = 0.25
    max_parent_check: bool = False

    def config(self, sigma2: float, truth=None) -> BuildConfig:
        source = (truth, NoiseModel(sigma2)) if self.estimator == ORACLE else None
        est = EstimatorSpec(self.estimator, ridge_lambda=self.ridge_lambda, oracle_source=source)
        return BuildConfig(sigma2=sigma2, eps_leaf=self.eps_leaf, eps_edge=self.eps_edge,
                           rho=self.rho, estimator=est, max_parent_check=self.max_parent_check)


@dataclass(frozen=True)
class ExperimentSpec:
    n: int = 200
    d: float = 4.0
    m_list: tuple = (1000,)
    weight_lo: float = 0.5
    weight_hi: float = 2.0
    sigma2: float = 1.0
    trials: int = 10
    base_seed: int = 0
    methods: tuple = (MethodSpec("BUILD-0.02", rho=0.02),)
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "m_list", tuple(int(m) for m in self.m_list))
        object.__setattr__(self, "methods", tuple(self.methods))
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if not self.m_list:
            raise ConfigError("m_list must not be empty")
        if not self.methods:
            raise ConfigError("at least one method is required")
        labels = [mth.label for mth in self.methods]
        if len(set(labels)) != len(labels):
            raise ConfigError(f"method labels must be unique, got {labels}")
        if self.base_seed < 0:
            raise ConfigError("base_seed must be non-negative")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        # fail early on bad method parameters instead of once per trial
        for mth in self.methods:
            if mth.estimator != ORACLE:
                try:
                    mth.config(self.sigma2)
                except BuildDagError as exc:
                    raise ConfigError(f"method {mth.label!r}: {exc}") from None

    def to_dict(self) -> dict:
        out = asdict(self)
        out["m_list"] = list(self.m_list)
        out["methods"] = [asdict(mth) for mth in self.methods]
        return out


@dataclass
class TrialRecord:
    method: str
    m: int
    trial: int
    seed: int
    shd: Optional[int] = None
    fdr: Optional[float] = None
    tpr: Optional[float] = None
    nmse: Optional[float] = None
    runtime_s: Optional[float] = None
    refresh_count: Optional[int] = None
    incomplete: Optional[bool] = None
    failure: str = ""

    @property
    def failed(self) -> bool:
        return bool(self.failure)


def _run_trial(spec: ExperimentSpec, trial: int) -> list[TrialRecord]:
    seed = spec.base_seed + trial
    dag = sample_er_dag(spec.n, spec.d, spec.weight_lo, spec.weight_hi, seed)
    records = []
    for m in spec.m_list:
        x = sample_data(dag, spec.sigma2, m, seed)
        for mth in spec.methods:
            rec = TrialRecord(method=mth.label, m=m, trial=trial, seed=seed)
            config = mth.config(spec.sigma2, truth=dag)
            start = time.perf_counter()
            try:
                result = run_build(x, config)
            except BuildDagError as exc:
                rec.runtime_s = time.perf_counter() - start
                rec.failure = f"{type(exc).__name__}: {exc}"
                records.append(rec)
                continue
            rec.runtime_s = time.perf_counter() - start
            report = evaluate(result.a_hat, dag.weights)
            rec.shd, rec.fdr, rec.tpr, rec.nmse = report.shd, report.fdr, report.tpr, report.nmse
            rec.refresh_count = result.refresh_count
            rec.incomplete = result.incomplete
            records.append(rec)
    return records


def run_experiment(spec: ExperimentSpec) -> list[TrialRecord]:
    """Run every (m, trial, method) cell; failures are recorded, never raised."""
    trials = range(spec.trials)
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            per_trial = list(pool.map(_run_trial, [spec] * spec.trials, trials))
    else:
        per_trial = [_run_trial(spec, t) for t in trials]
    m_pos = {m: k for k, m in enumerate(spec.m_list)}
    method_pos = {mth.label: k for k, mth in enumerate(spec.methods)}
    records = [rec for chunk in per_trial for rec in chunk]
    records.sort(key=lambda r: (method_pos[r.method], m_pos[r.m], r.trial))
    return records


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return "" if math.isnan(value) else repr(value)
    return str(value)


def records_to_csv(records, include_runtime: bool = True) -> str:
    """CSV text in the fixed column order; ``include_runtime=False`` blanks the timing column."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        row = []
        for col in CSV_COLUMNS:
            value = getattr(rec, col)
            if col == "runtime_s" and not include_runtime:
                value = None
            row.append(_cell(value))
        writer.writerow(row)
    return buf.getvalue()


def aggregate(records) -> list[dict]:
    """Per (method, m): trial count, failure count and mean/std/median/p10/p90 of each metric.

    Failed trials are left out of the statistics; if every trial failed the
    statistic cells are ``None``. ``std`` is the population standard deviation.
    """
    records = list(records)
    if not records:
        raise ValueError("cannot aggregate an empty record list")
    groups: dict[tuple, list] = {}
    for rec in records:
        groups.setdefault((rec.method, rec.m), []).append(rec)
    rows = []
    for (method, m), recs in groups.items():
        ok = [r for r in recs if not r.failed]
        row = {"method": method, "m": m, "trials": len(recs), "failure_count": len(recs) - len(ok)}
        for metric in SUMMARY_METRICS:
            vals = np.array([getattr(r, metric) for r in ok], dtype=float)
            vals = vals[~np.isnan(vals)]
            if vals.size == 0:
                row.update({f"{metric}_{s}": None for s in SUMMARY_STATS})
                continue
            p10, med, p90 = np.percentile(vals, [10, 50, 90])
            row[f"{metric}_mean"] = float(vals.mean())
            row[f"{metric}_std"] = float(vals.std())
            row[f"{metric}_median"] = float(med)
            row[f"{metric}_p10"] = float(p10)
            row[f"{metric}_p90"] = float(p90)
        rows.append(row)
    return rows


def summary_to_csv(rows) -> str:
    buf = io.StringIO()
    cols = ["method", "m", "trials", "failure_count"] + [
        f"{metric}_{s}" for metric in SUMMARY_METRICS for s in SUMMARY_STATS]
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for row in rows:
        writer.writerow([_cell(row[c]) for c in cols])
    return buf.getvalue()


_SCALAR_KEYS = {f.name for f in fields(ExperimentSpec)} - {"methods"}
_METHOD_KEYS = {f.name for f in fields(MethodSpec)}


def experiment_from_dict(raw: dict) -> ExperimentSpec:
    """Build a spec from a parsed config mapping.

    ``methods`` may be a list of tables each carrying ``label``, or a table
    keyed by label.
    """
    raw = dict(raw)
    unknown = set(raw) - _SCALAR_KEYS - {"methods"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    methods_raw = raw.pop("methods", None)
    if methods_raw is None:
        methods = ExperimentSpec.methods
    else:
        if isinstance(methods_raw, dict):
            methods_raw = [{"label": label, **body} for label, body in methods_raw.items()]
        methods = []
        for body in methods_raw:
            bad = set(body) - _METHOD_KEYS
            if bad:
                raise ConfigError(f"unknown method keys: {sorted(bad)}")
            if "label" not in body:
                raise ConfigError("every method needs a label")
            methods.append(MethodSpec(**body))
    try:
        return ExperimentSpec(methods=tuple(methods), **raw)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None


def load_experiment(path, overrides: Optional[dict] = None) -> ExperimentSpec:
    """Read a TOML experiment file and apply non-``None`` overrides on top."""
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    for key, value in (overrides or {}).items():
        if value is not None:
            raw[key] = value
    return experiment_from_dict(raw)


def write_outputs(spec: ExperimentSpec, records, out_dir) -> Path:
    """Write ``trials.csv``, ``summary.csv`` and the resolved config into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "trials.csv").write_text(records_to_csv(records))
    (out / "summary.csv").write_text(summary_to_csv(aggregate(records)))
    (out / "config.resolved.json").write_text(json.dumps(spec.to_dict(), indent=2, sort_keys=True) + "\n")
    return out
