"""Conditional-independence oracles consumed by FCI.

Every oracle answers ``independent(a, b, cond) -> bool`` and is symmetric in
``(a, b)``.
"""

from __future__ import annotations

import threading
import warnings
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.stats import norm

from .graph_core import MixedGraph
from .separation import m_separated


@dataclass(frozen=True)
class Tolerances:
    exact_ci: float = 1e-9
    partial_correlation: float = 1e-9
    density_exact: float = 1e-10
    density_perturbed: float = 1e-6
    max_condition: float = 1e12


TOL = Tolerances()


class CITestWarning(UserWarning):
    pass


class CiOracle:
    """Base oracle with a thread-safe cache keyed by ``(min(a,b), max(a,b), sorted cond)``."""

    kind = "abstract"
    alpha: float | None = None

    def __init__(self):
        self._cache: dict = {}
        self._lock = threading.Lock()
        self.n_queries = 0

    def independent(self, a: int, b: int, cond: Iterable[int] = ()) -> bool:
        key = (min(a, b), max(a, b), tuple(sorted(cond)))
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit
        result = bool(self._test(key[0], key[1], key[2]))
        with self._lock:
            self._cache[key] = result
            self.n_queries += 1
        return result

    __call__ = independent

    def _test(self, a: int, b: int, cond: tuple[int, ...]) -> bool:
        raise NotImplementedError


# --- Fisher z


def partial_correlation(corr: np.ndarray, a: int, b: int, cond: Iterable[int]) -> tuple[float, float]:
    """Partial correlation of ``a`` and ``b`` given ``cond`` and the condition number used."""
    idx = [a, b, *cond]
    sub = corr[np.ix_(idx, idx)]
    cnum = np.linalg.cond(sub)
    if not np.isfinite(cnum) or cnum > TOL.max_condition:
        return float("nan"), float(cnum)
    prec = np.linalg.inv(sub)
    r = -prec[0, 1] / np.sqrt(prec[0, 0] * prec[1, 1])
    return float(np.clip(r, -1.0, 1.0)), float(cnum)


def fisher_z_statistic(r: float, n: int, k: int) -> float:
    """``sqrt(n - k - 3) * |atanh(r)|``; infinite for ``|r| = 1``."""
    if abs(r) >= 1.0:
        return float("inf")
    return float(np.sqrt(n - k - 3) * abs(0.5 * np.log((1 + r) / (1 - r))))


def fisher_z(data: np.ndarray, a: int, b: int, cond: Iterable[int] = (), alpha: float = 0.05, corr=None) -> bool:
    """Gaussian CI test; True means "independent" at level ``alpha``.

    A numerically singular correlation block is reported as dependent with a
    :class:`CITestWarning`.
    """
    cond = list(cond)
    n = data.shape[0]
    if n <= len(cond) + 3:
        raise ValueError(f"need more than {len(cond) + 3} samples, got {n}")
    if a == b or a in cond or b in cond:
        raise ValueError("variables must be distinct")
    if corr is None:
        corr = np.corrcoef(data, rowvar=False)
    r, cnum = partial_correlation(corr, a, b, cond)
    if np.isnan(r):
        if _perfectly_collinear(corr, a, b):
            return False
        warnings.warn(f"near-singular correlation block for ({a},{b}|{cond}); condition {cnum:.3g}", CITestWarning)
        return False
    stat = fisher_z_statistic(r, n, len(cond))
    return stat <= norm.ppf(1 - alpha / 2)


def _perfectly_collinear(corr, a, b):
    return abs(abs(corr[a, b]) - 1.0) < 1e-12


class FisherZOracle(CiOracle):
    kind = "fisher"

    def __init__(self, data: np.ndarray, alpha: float = 0.05):
        super().__init__()
        self.data = np.asarray(data, dtype=float)
        self.alpha = float(alpha)
        self.n = self.data.shape[0]
        with np.errstate(invalid="ignore", divide="ignore"):
            self.corr = np.corrcoef(self.data, rowvar=False)
        self.threshold = norm.ppf(1 - self.alpha / 2)
        self.n_singular = 0

    def _test(self, a, b, cond):
        if self.n <= len(cond) + 3:
            raise ValueError(f"need more than {len(cond) + 3} samples, got {self.n}")
        r, _ = partial_correlation(self.corr, a, b, cond)
        if np.isnan(r):
            self.n_singular += 1
            return False
        return fisher_z_statistic(r, self.n, len(cond)) <= self.threshold

    def with_alpha(self, alpha: float) -> "FisherZOracle":
        """Same data at another level; reuses the correlation matrix."""
        o = FisherZOracle.__new__(FisherZOracle)
        CiOracle.__init__(o)
        o.data, o.n, o.corr = self.data, self.n, self.corr
        o.alpha = float(alpha)
        o.threshold = norm.ppf(1 - o.alpha / 2)
        o.n_singular = 0
        return o


# --- exact discrete


def _marginal(joint: np.ndarray, keep: list[int]) -> np.ndarray:
    drop = tuple(i for i in range(joint.ndim) if i not in keep)
    m = joint.sum(axis=drop)
    # axes of m are in ascending original order; reorder to `keep`
    order = np.argsort(np.argsort(keep))
    return np.transpose(m, order) if len(keep) > 1 else m


def exact_discrete_ci(joint: np.ndarray, set_a, set_b, set_c=(), tol: float = TOL.exact_ci) -> bool:
    """True iff ``max |p(a,b|c) - p(a|c) p(b|c)| <= tol`` over every ``c`` with ``p(c) > 0``."""
    a, b, c = sorted(set_a), sorted(set_b), sorted(set_c)
    if set(a) & set(b) or set(a) & set(c) or set(b) & set(c):
        raise ValueError("sets must be disjoint")
    if tol <= 0:
        raise ValueError("tol must be positive")
    keep = a + b + c
    m = _marginal(joint, keep)
    sa = int(np.prod([joint.shape[i] for i in a]))
    sb = int(np.prod([joint.shape[i] for i in b]))
    sc = int(np.prod([joint.shape[i] for i in c])) if c else 1
    m = m.reshape(sa, sb, sc)
    pc = m.sum(axis=(0, 1))
    ok = pc > 0
    if not ok.any():
        return True
    m, pc = m[:, :, ok], pc[ok]
    pab = m / pc
    pa = pab.sum(axis=1, keepdims=True)
    pb = pab.sum(axis=0, keepdims=True)
    return float(np.max(np.abs(pab - pa * pb))) <= tol


class ExactDiscreteOracle(CiOracle):
    kind = "exact"

    def __init__(self, joint: np.ndarray, tol: float = TOL.exact_ci):
        super().__init__()
        self.joint = joint
        self.tol = tol

    def _test(self, a, b, cond):
        return exact_discrete_ci(self.joint, [a], [b], cond, self.tol)


# --- population Gaussian


def population_gaussian_ci(cov: np.ndarray, a: int, b: int, cond: Iterable[int] = (), tol: float = TOL.partial_correlation) -> bool:
    cov = np.asarray(cov, dtype=float)
    if not np.allclose(cov, cov.T) or np.min(np.linalg.eigvalsh(cov)) <= 0:
        raise ValueError("covariance must be symmetric positive definite")
    sd = np.sqrt(np.diag(cov))
    corr = cov / np.outer(sd, sd)
    idx = [a, b, *cond]
    prec = np.linalg.inv(corr[np.ix_(idx, idx)])
    r = -prec[0, 1] / np.sqrt(prec[0, 0] * prec[1, 1])
    return abs(r) <= tol


class PopulationGaussianOracle(CiOracle):
    kind = "population"

    def __init__(self, cov: np.ndarray, tol: float = TOL.partial_correlation):
        super().__init__()
        self.cov = np.asarray(cov, dtype=float)
        self.tol = tol

    def _test(self, a, b, cond):
        return population_gaussian_ci(self.cov, a, b, cond, self.tol)


# --- graphical


class GraphicalOracle(CiOracle):
    """Answers CI queries by d-/m-separation.

    With ``lift=(k, n_nodes)`` the graph is a mixture DAG and a query on
    ``V`` is asked of all ``k`` copies of each set.
    """

    kind = "graphical"

    def __init__(self, g: MixedGraph, lift: tuple[int, int] | None = None):
        super().__init__()
        self.graph = g
        self.lift = lift

    def _lifted(self, nodes):
        k, n = self.lift
        return {j * n + v for j in range(k) for v in nodes}

    def _test(self, a, b, cond):
        if self.lift is None:
            return m_separated(self.graph, {a}, {b}, cond)
        return m_separated(self.graph, self._lifted([a]), self._lifted([b]), self._lifted(cond))


def graphical_oracle(g: MixedGraph, lift: tuple[int, int] | None = None) -> GraphicalOracle:
    return GraphicalOracle(g, lift)
