"""Evaluation: normalized PAG SHD, varying-node rates, k-means and V-measure."""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, fields
from typing import Iterable, Sequence

import numpy as np

from .graph_core import ARROW, TAIL, Pag


@dataclass
class TrialResult:
    trial: int
    seed: int
    alpha: float
    normalized_shd: float = float("nan")
    tpr: float = float("nan")
    fpr: float = float("nan")
    adjacency_tpr: float = float("nan")
    v_measure_all: float = float("nan")
    v_measure_varying: float = float("nan")
    runtime_ms: float = 0.0

    def __post_init__(self):
        for f in ("normalized_shd", "tpr", "fpr", "adjacency_tpr", "v_measure_all", "v_measure_varying"):
            x = getattr(self, f)
            if not np.isnan(x) and not 0.0 <= x <= 1.0:
                raise ValueError(f"{f}={x} outside [0, 1]")


def trial_results_csv(rows: Iterable[TrialResult], include_runtime: bool = True) -> str:
    """CSV with a stable header; drop the wall-clock column for reproducible output."""
    buf = io.StringIO()
    names = [f.name for f in fields(TrialResult)]
    if not include_runtime:
        names.remove("runtime_ms")
    w = csv.DictWriter(buf, fieldnames=names, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in asdict(r).items()})
    return buf.getvalue()


def _endpoint_conflict(m1: str, m2: str) -> bool:
    return {m1, m2} == {ARROW, TAIL}


def shd_counts(p1: Pag, p2: Pag) -> tuple[int, int]:
    """``(errors, possible_errors)`` between two PAGs over the same nodes.

    Errors: arrow-vs-tail endpoint conflicts on shared adjacencies (circles
    match anything) plus adjacencies present in only one graph. The bound
    counts two endpoints per shared adjacency and one per unshared one.
    """
    if p1.n_nodes != p2.n_nodes:
        raise ValueError("PAGs must have the same node count")
    a1, a2 = p1.adjacencies(), p2.adjacencies()
    shared = a1 & a2
    errors = len(a1 ^ a2)
    for u, v in shared:
        (x1, y1), (x2, y2) = p1.marks[(u, v)], p2.marks[(u, v)]
        errors += _endpoint_conflict(x1, x2) + _endpoint_conflict(y1, y2)
    return errors, 2 * len(shared) + len(a1 ^ a2)


def normalized_shd(p1: Pag, p2: Pag) -> float:
    errors, bound = shd_counts(p1, p2)
    return errors / bound if bound else 0.0


def adjacency_tpr(estimated: Pag, truth_pairs) -> float:
    truth = {(min(u, v), max(u, v)) for u, v in truth_pairs}
    if not truth:
        return 1.0
    return len(estimated.adjacencies() & truth) / len(truth)


def varying_rates(estimated, truth, all_nodes) -> tuple[float, float]:
    """True and false positive rates of an estimated node set."""
    est, tru, alln = set(estimated), set(truth), set(all_nodes)
    if not est <= alln or not tru <= alln:
        raise ValueError("sets must be subsets of all_nodes")
    tpr = len(est & tru) / len(tru) if tru else 1.0
    neg = alln - tru
    fpr = len(est - tru) / len(neg) if neg else 0.0
    return tpr, fpr


# --- clustering


def _kmeans_pp(x, k, rng):
    n = x.shape[0]
    centers = [x[rng.integers(n)]]
    d2 = np.sum((x - centers[0]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx = rng.integers(n)
        else:
            idx = rng.choice(n, p=d2 / total)
        centers.append(x[idx])
        d2 = np.minimum(d2, np.sum((x - x[idx]) ** 2, axis=1))
    return np.array(centers)


def _assign(x, centers, x_sq=None):
    x_sq = (x**2).sum(axis=1) if x_sq is None else x_sq
    d = x_sq[:, None] - 2.0 * x @ centers.T + (centers**2).sum(axis=1)[None, :]
    lab = np.argmin(d, axis=1)
    return lab, float(np.maximum(d[np.arange(len(x)), lab], 0.0).sum())


def _lloyd(x, centers, max_iter, tol, check_monotone=False):
    last = np.inf
    x_sq = (x**2).sum(axis=1)
    for _ in range(max_iter):
        labels, inertia = _assign(x, centers, x_sq)
        if check_monotone:
            assert inertia <= last + 1e-9 * max(1.0, abs(last))
        last = inertia
        counts = np.bincount(labels, minlength=len(centers))
        sums = np.zeros_like(centers)
        np.add.at(sums, labels, x)
        new = np.where(counts[:, None] > 0, sums / np.maximum(counts, 1)[:, None], centers)
        shift = np.sqrt(((new - centers) ** 2).sum(axis=1)).max()
        centers = new
        if shift <= tol:
            break
    return _assign(x, centers, x_sq)


def kmeans(
    data,
    k: int,
    seed=None,
    n_init: int = 10,
    max_iter: int = 300,
    tol: float = 1e-6,
    check_monotone: bool = False,
) -> np.ndarray:
    """Lloyd's algorithm with k-means++ seeding; the best of ``n_init`` restarts wins."""
    x = np.asarray(data, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    if k < 1:
        raise ValueError("k must be positive")
    if k > n:
        raise ValueError(f"k={k} exceeds the number of points {n}")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(n_init):
        labels, inertia = _lloyd(x, _kmeans_pp(x, k, rng), max_iter, tol, check_monotone)
        if best is None or inertia < best[1]:
            best = (labels, inertia)
    return best[0]


def kmeans_inertia(data, labels) -> float:
    x = np.asarray(data, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    total = 0.0
    for j in np.unique(labels):
        m = x[labels == j]
        total += float(((m - m.mean(axis=0)) ** 2).sum())
    return total


def _entropy(counts):
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log(p)).sum())


def v_measure(labels: Sequence, truth: Sequence) -> float:
    """Harmonic mean of homogeneity and completeness (natural-log entropies)."""
    labels, truth = np.asarray(labels), np.asarray(truth)
    if labels.shape != truth.shape:
        raise ValueError("label arrays differ in length")
    _, li = np.unique(labels, return_inverse=True)
    _, ti = np.unique(truth, return_inverse=True)
    table = np.zeros((ti.max() + 1, li.max() + 1))
    np.add.at(table, (ti, li), 1)
    h_truth = _entropy(table.sum(axis=1))
    h_labels = _entropy(table.sum(axis=0))
    n = table.sum()
    nz = table > 0
    joint = table[nz] / n
    # H(truth | labels) and H(labels | truth)
    col = np.broadcast_to(table.sum(axis=0, keepdims=True), table.shape)[nz] / n
    row = np.broadcast_to(table.sum(axis=1, keepdims=True), table.shape)[nz] / n
    h_t_given_l = float(-(joint * np.log(joint / col)).sum())
    h_l_given_t = float(-(joint * np.log(joint / row)).sum())
    h = 1.0 if h_truth == 0 else 1.0 - h_t_given_l / h_truth
    c = 1.0 if h_labels == 0 else 1.0 - h_l_given_t / h_labels
    if h + c == 0:
        return 0.0
    return 2 * h * c / (h + c)
