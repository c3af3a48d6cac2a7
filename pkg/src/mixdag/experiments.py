"""Synthetic experiments, the verification run and the real-data workflow.

Every experiment is a pure function of its :class:`ExperimentConfig`: trial
``t`` draws from ``np.random.default_rng([master_seed, t])`` and results are
keyed by trial id, so the number of worker processes never changes output.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .ci import ExactDiscreteOracle, FisherZOracle, graphical_oracle
from .fci import fci, fci_stability_selection
from .graph_core import graph_to_json
from .metrics import TrialResult, adjacency_tpr, kmeans, normalized_shd, trial_results_csv, v_measure, varying_rates
from .mixture import bidirected_degree_ranking, component_mags, union_graph, varying_nodes, varying_nodes_from_pag
from .sem import (
    GaussianMixtureSem,
    dirichlet_proportions,
    exact_joint,
    random_discrete_mixture,
    random_mixture_sem,
    sample,
    union_sem_sample,
)

KINDS = ("shd", "varying", "cluster", "verify", "real-data")
SETTINGS = ("no-descendants", "descendants")
UNION_SEM_NOTE = "union-MAG samples: bidirected edges via latent N(0,1) parent, unit weights"


class DataError(ValueError):
    """Input data cannot be used (malformed CSV, too few usable columns)."""


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str = "shd"
    k: int = 4
    n_nodes: int = 10
    n_samples: int = 5000
    proportions: str = "uniform"
    alphas: tuple[float, ...] = (0.001, 0.01, 0.05, 0.1)
    n_trials: int = 30
    master_seed: int = 0
    setting: str = "no-descendants"
    oracle: str = "fisher"
    k_tilde: tuple[int, ...] = (1, 2, 3, 4, 5, 6)
    cluster_alpha: float = 0.05
    n_subsamples: int = 50
    keep_fraction: float = 0.5
    threshold: float = 0.6
    verify_scale: float = 1.0
    inject_bug: bool = False
    out_dir: str | None = None
    jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "k_tilde", tuple(int(x) for x in self.k_tilde))
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if self.setting not in SETTINGS:
            raise ValueError(f"unknown clustering setting {self.setting!r}")
        if self.oracle not in ("exact", "fisher"):
            raise ValueError(f"unknown oracle {self.oracle!r}")
        for name in ("k", "n_nodes", "n_samples", "n_trials", "jobs", "n_subsamples"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if not self.alphas or not all(0 < a < 1 for a in self.alphas):
            raise ValueError("alphas must lie in (0, 1)")
        if not 0 < self.cluster_alpha < 1:
            raise ValueError("cluster_alpha must lie in (0, 1)")
        if not self.k_tilde or min(self.k_tilde) < 1:
            raise ValueError("k_tilde values must be positive")
        parse_proportions(self.proportions, self.k, None)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def identity(self) -> dict:
        """Fields that determine results; excludes output location and parallelism."""
        d = asdict(self)
        d.pop("out_dir")
        d.pop("jobs")
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.identity(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def parse_proportions(spec: str, k: int, rng) -> np.ndarray | None:
    """``uniform`` or ``dirichlet:<alpha>``; returns None for uniform."""
    if spec == "uniform":
        return None
    kind, _, arg = spec.partition(":")
    if kind != "dirichlet":
        raise ValueError(f"bad proportions {spec!r}")
    try:
        conc = float(arg) if arg else 2.0
    except ValueError as exc:
        raise ValueError(f"bad proportions {spec!r}") from exc
    if conc <= 0:
        raise ValueError("dirichlet concentration must be positive")
    if rng is None:
        return None
    return dirichlet_proportions(k, conc, rng)


def trial_rng(cfg: ExperimentConfig, t: int) -> np.random.Generator:
    return np.random.default_rng([cfg.master_seed, t])


def _map_trials(fn: Callable, cfg: ExperimentConfig) -> list:
    """Run ``fn(cfg, t)`` for every trial; results come back in trial order."""
    ids = list(range(cfg.n_trials))
    if cfg.jobs == 1 or cfg.n_trials == 1:
        out = [fn(cfg, t) for t in ids]
    else:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as ex:
            out = list(ex.map(fn, [cfg] * len(ids), ids))
    return out


# --- SHD and varying-node detection


def _fisher_pags(data, alphas, n_nodes):
    base = FisherZOracle(data, alphas[0])
    return [fci(base.with_alpha(a), n_nodes) for a in alphas]


def synthetic_trial(cfg: ExperimentConfig, t: int) -> list[TrialResult]:
    """One draw of the mixture pipeline; one result per alpha."""
    t0 = time.perf_counter()
    rng = trial_rng(cfg, t)
    sem = random_mixture_sem(cfg.k, cfg.n_nodes, rng)
    spec = sem.spec
    union = union_graph(component_mags(spec))
    n = cfg.n_nodes
    if cfg.oracle == "exact":
        joint = exact_joint(random_discrete_mixture(spec, rng))
        est = fci(ExactDiscreteOracle(joint), n)
        ref = fci(graphical_oracle(union), n)
        est_pags, ref_pags = [est] * len(cfg.alphas), [ref] * len(cfg.alphas)
        truth = varying_nodes(union)
    else:
        props = parse_proportions(cfg.proportions, cfg.k, rng)
        data, _ = sample(sem, cfg.n_samples, props, rng)
        udata = union_sem_sample(sem, union, cfg.n_samples, rng)
        est_pags = _fisher_pags(data, cfg.alphas, n)
        ref_pags = _fisher_pags(udata, cfg.alphas, n)
        truth = spec.varying
    elapsed = (time.perf_counter() - t0) * 1000 / len(cfg.alphas)
    rows = []
    for a, est, ref in zip(cfg.alphas, est_pags, ref_pags):
        tpr, fpr = varying_rates(varying_nodes_from_pag(est), truth, range(n))
        rows.append(
            TrialResult(
                trial=t,
                seed=cfg.master_seed,
                alpha=a,
                normalized_shd=normalized_shd(est, ref),
                tpr=tpr,
                fpr=fpr,
                adjacency_tpr=adjacency_tpr(est, union.directed | union.bidirected),
                runtime_ms=round(elapsed, 1),
            )
        )
    return rows


def run_synthetic_trials(cfg: ExperimentConfig) -> list[TrialResult]:
    return [r for rows in _map_trials(synthetic_trial, cfg) for r in rows]


def _mean_stderr(x) -> tuple[float, float]:
    x = np.asarray(x, dtype=float)
    x = x[~np.isnan(x)]
    if len(x) == 0:
        return float("nan"), float("nan")
    se = float(x.std(ddof=1) / np.sqrt(len(x))) if len(x) > 1 else 0.0
    return float(x.mean()), se


def aggregate(rows: Sequence[TrialResult], columns: Sequence[str]) -> list[dict]:
    """Per-alpha mean and standard error of each named TrialResult column."""
    out = []
    for a in sorted({r.alpha for r in rows}):
        sel = [r for r in rows if r.alpha == a]
        rec = {"alpha": a, "n_trials": len(sel)}
        for c in columns:
            m, se = _mean_stderr([getattr(r, c) for r in sel])
            rec[c], rec[f"{c}_stderr"] = m, se
        out.append(rec)
    return out


def _table_csv(cfg: ExperimentConfig, records: list[dict], note: str = "") -> str:
    buf = io.StringIO()
    buf.write(metadata_line(cfg, note))
    if records:
        w = csv.DictWriter(buf, fieldnames=list(records[0]), lineterminator="\n")
        w.writeheader()
        for r in records:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def metadata_line(cfg: ExperimentConfig, note: str = "") -> str:
    extra = f" note={note!r}" if note else ""
    return f"# mixdag kind={cfg.kind} config_hash={cfg.config_hash()} master_seed={cfg.master_seed}{extra}\n"


@dataclass
class ExperimentOutput:
    summary_csv: str
    trials_csv: str
    records: list[dict]
    trials: list = field(default_factory=list)

    def write(self, out_dir, stem: str) -> list[Path]:
        d = Path(out_dir)
        d.mkdir(parents=True, exist_ok=True)
        paths = [d / f"{stem}.csv", d / f"{stem}_trials.csv"]
        paths[0].write_text(self.summary_csv)
        paths[1].write_text(self.trials_csv)
        return paths


def _synthetic_output(cfg, rows, columns, note):
    records = aggregate(rows, columns)
    trials_csv = metadata_line(cfg, note) + trial_results_csv(rows, include_runtime=False)
    return ExperimentOutput(_table_csv(cfg, records, note), trials_csv, records, rows)


def run_shd_experiment(cfg: ExperimentConfig, rows: Sequence[TrialResult] | None = None) -> ExperimentOutput:
    """Normalized SHD between FCI on mixture data and FCI on union-MAG data, per alpha."""
    cfg = replace(cfg, kind="shd")
    rows = run_synthetic_trials(cfg) if rows is None else rows
    return _synthetic_output(cfg, rows, ["normalized_shd"], UNION_SEM_NOTE)


def run_varying_experiment(cfg: ExperimentConfig, rows: Sequence[TrialResult] | None = None) -> ExperimentOutput:
    """Varying-node TPR/FPR and adjacency TPR of the mixture FCI output, per alpha."""
    cfg = replace(cfg, kind="varying")
    rows = run_synthetic_trials(cfg) if rows is None else rows
    return _synthetic_output(cfg, rows, ["tpr", "fpr", "adjacency_tpr"], "")


# --- clustering


def _varying_has_children(sem: GaussianMixtureSem) -> bool:
    varying = sem.spec.varying
    return any(g.children(v) for g in sem.spec.components for v in varying)


def clustering_sem(cfg: ExperimentConfig, rng, max_tries: int = 1000) -> GaussianMixtureSem:
    """Draw a sem whose varying nodes are all sinks (no-descendants) or include a non-sink (descendants)."""
    want_children = cfg.setting == "descendants"
    for _ in range(max_tries):
        sem = random_mixture_sem(cfg.k, cfg.n_nodes, rng)
        if sem.spec.varying and _varying_has_children(sem) == want_children:
            return sem
    raise RuntimeError(f"no sem for setting {cfg.setting!r} in {max_tries} draws")


def cluster_trial(cfg: ExperimentConfig, t: int) -> list[dict]:
    rng = trial_rng(cfg, t)
    sem = clustering_sem(cfg, rng)
    props = parse_proportions(cfg.proportions, cfg.k, rng)
    data, labels = sample(sem, cfg.n_samples, props, rng)
    est = sorted(varying_nodes_from_pag(fci(FisherZOracle(data, cfg.cluster_alpha), cfg.n_nodes)))
    # no estimated varying node: fall back to all features
    cols = est if est else list(range(cfg.n_nodes))
    sd = data.std(axis=0)
    data = (data - data.mean(axis=0)) / np.where(sd > 0, sd, 1.0)
    rows = []
    for kt in cfg.k_tilde:
        kt_eff = min(kt, cfg.n_samples)
        seed = [cfg.master_seed, t, kt]
        rows.append(
            {
                "trial": t,
                "k_tilde": kt,
                "n_selected": len(est),
                "v_measure_varying": v_measure(kmeans(data[:, cols], kt_eff, seed), labels),
                "v_measure_all": v_measure(kmeans(data, kt_eff, seed), labels),
            }
        )
    return rows


def run_cluster_experiment(cfg: ExperimentConfig) -> ExperimentOutput:
    """V-measure of k-means on estimated varying features versus all features, per K-tilde.

    Columns are standardized before clustering so no feature dominates by scale.
    """
    cfg = replace(cfg, kind="cluster")
    rows = [r for rs in _map_trials(cluster_trial, cfg) for r in rs]
    records = []
    for kt in cfg.k_tilde:
        sel = [r for r in rows if r["k_tilde"] == kt]
        rec = {"k_tilde": kt, "n_trials": len(sel)}
        for c in ("v_measure_varying", "v_measure_all"):
            rec[c], rec[f"{c}_stderr"] = _mean_stderr([r[c] for r in sel])
        records.append(rec)
    note = f"setting={cfg.setting}"
    return ExperimentOutput(_table_csv(cfg, records, note), _table_csv(cfg, rows, note), records, rows)


# --- verification


def run_verify(cfg: ExperimentConfig):
    """All property suites; returns ``(reports, ok)`` where ``ok`` covers theorem-backed suites."""
    from .verify import run_all

    reports = run_all(seed=cfg.master_seed, scale=cfg.verify_scale, inject_bug=cfg.inject_bug)
    ok = all(r.ok for r in reports if r.theorem_backed)
    return reports, ok


# --- real data


def read_samples_csv(path) -> tuple[np.ndarray, list[str]]:
    """Numeric CSV with a header row; raises DataError on malformed input."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataError(str(exc)) from exc
    rows = [r for r in rows if r and not r[0].startswith("#")]
    if len(rows) < 2:
        raise DataError("CSV needs a header and at least one data row")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    if any(len(r) != len(header) for r in body):
        raise DataError("ragged CSV rows")
    try:
        data = np.array([[float(x) for x in r] for r in body])
    except ValueError as exc:
        raise DataError(f"non-numeric value: {exc}") from exc
    if not np.all(np.isfinite(data)):
        raise DataError("CSV contains non-finite values")
    return data, header


def standardize(data: np.ndarray, names: Sequence[str]) -> tuple[np.ndarray, list[str]]:
    """Center and scale columns, dropping constant ones with a warning."""
    sd = data.std(axis=0)
    keep = sd > 0
    if not keep.all():
        dropped = [n for n, k in zip(names, keep) if not k]
        warnings.warn(f"dropping constant columns: {dropped}")
    data = data[:, keep]
    names = [n for n, k in zip(names, keep) if k]
    if data.shape[1] < 2:
        raise DataError("need at least two non-constant columns")
    return (data - data.mean(axis=0)) / sd[keep], names


@dataclass
class RealDataOutput:
    pag_json: str
    ranking_csv: str
    names: list[str]

    def write(self, out_dir) -> list[Path]:
        d = Path(out_dir)
        d.mkdir(parents=True, exist_ok=True)
        paths = [d / "pag.json", d / "bidirected_ranking.csv"]
        paths[0].write_text(self.pag_json)
        paths[1].write_text(self.ranking_csv)
        return paths


def run_real_data(csv_path, cfg: ExperimentConfig) -> RealDataOutput:
    """Stability-selected FCI on a samples CSV plus the bidirected-degree ranking."""
    cfg = replace(cfg, kind="real-data")
    raw, names = read_samples_csv(csv_path)
    data, names = standardize(raw, names)
    pag = fci_stability_selection(
        data,
        alpha=cfg.alphas[0],
        n_subsamples=cfg.n_subsamples,
        keep_fraction=cfg.keep_fraction,
        threshold=cfg.threshold,
        seed=cfg.master_seed,
        labels=names,
    )
    buf = io.StringIO()
    buf.write(metadata_line(cfg))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["rank", "node", "bidirected_degree"])
    for i, (v, deg) in enumerate(bidirected_degree_ranking(pag), 1):
        w.writerow([i, names[v], deg])
    return RealDataOutput(graph_to_json(pag), buf.getvalue(), names)


def synthetic_standin_csv(path, n_per_group: int = 500, n_nodes: int = 10, seed: int = 0) -> Path:
    """Two pooled groups from a K=2 mixture, written without labels."""
    rng = np.random.default_rng(seed)
    sem = random_mixture_sem(2, n_nodes, rng)
    data, _ = sample(sem, 2 * n_per_group, None, rng)
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"g{i + 1}" for i in range(n_nodes)])
        for row in data:
            w.writerow([f"{x:.6f}" for x in row])
    return path
