"""Brute-force property suites backing the graphical results.

Each suite returns a :class:`SuiteReport` with the number of checks run and
a certificate (serialized graphs plus the failing query) for every
violation.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from .ci import ExactDiscreteOracle, exact_discrete_ci, graphical_oracle
from .fci import brute_force_pag, fci
from .generators import random_compatible_spec, random_mag, random_mixture_spec, random_rooted_dag
from .graph_core import Dag
from .marginal import marginalize_root, mixture_mag
from .metrics import normalized_shd, varying_rates
from .mixture import (
    MixtureSpec,
    component_mags,
    mixture_dag,
    mother_graph,
    m_d_connected,
    poset_compatible,
    union_graph,
    union_graph_lenient,
    varying_nodes,
    varying_nodes_from_pag,
)
from .sem import DiscreteMixture, example31_density_gap, exact_joint, random_discrete_mixture
from .separation import (
    d_separated,
    is_ancestral,
    is_maximal,
    is_maximal_brute_force,
    m_separated,
    path_is_open,
    simple_paths,
)


@dataclass
class SuiteReport:
    name: str
    checked: int = 0
    instances: int = 0
    violations: list = field(default_factory=list)
    seconds: float = 0.0
    theorem_backed: bool = True

    @property
    def ok(self) -> bool:
        return not self.violations

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return (
            f"[{status}] {self.name}: {self.instances} instances, {self.checked} checks, "
            f"{len(self.violations)} violations ({self.seconds:.1f}s)"
        )

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "ok": self.ok,
            "instances": self.instances,
            "checked": self.checked,
            "violations": self.violations[:20],
            "seconds": round(self.seconds, 3),
        }


def _timed(fn):
    def wrapper(*a, **kw):
        t0 = time.perf_counter()
        rep = fn(*a, **kw)
        rep.seconds = time.perf_counter() - t0
        return rep

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _subsets(nodes, max_size):
    for k in range(min(max_size, len(nodes)) + 1):
        yield from itertools.combinations(nodes, k)


# --- fixtures

CHAIN_LABELS = ("1", "2", "3", "4")


def two_chain_spec() -> MixtureSpec:
    """Two components over {1,2,3,4}: 1 -> 2 and 4 -> 3; nodes 1 and 4 invariant."""
    return MixtureSpec(
        (Dag(4, [(0, 1)], CHAIN_LABELS), Dag(4, [(3, 2)], CHAIN_LABELS)),
        frozenset({0, 3}),
        (0.5, 0.5),
    )


def incompatible_spec() -> MixtureSpec:
    """Components sharing the order 1..5 whose MAGs are not poset compatible.

    Component 1: 1 -> 2 -> 3 -> 4; component 2: 2 -> 3 -> 4 -> 5. Nodes 2
    and 5 vary.
    """
    labels = ("1", "2", "3", "4", "5")
    return MixtureSpec(
        (Dag(5, [(0, 1), (1, 2), (2, 3)], labels), Dag(5, [(1, 2), (2, 3), (3, 4)], labels)),
        frozenset({0, 2, 3}),
    )


def mother_graph_counterexample() -> DiscreteMixture:
    """Binary mixture on the two-chain components where X1 and X4 stay dependent given X2, X3."""
    spec = two_chain_spec()
    half = np.array([0.5, 0.5])
    x2_given_x1 = np.array([[0.9, 0.1], [0.2, 0.8]])
    x3_given_x4 = np.array([[0.85, 0.15], [0.25, 0.75]])
    c1 = (half, x2_given_x1, half, half)
    c2 = (half, half, x3_given_x4, half)
    return DiscreteMixture(spec, (2, 2, 2, 2), (c1, c2))


@_timed
def fixture_suite() -> SuiteReport:
    rep = SuiteReport("fixtures")
    rep.instances = 4

    def check(name, cond, detail=None):
        rep.checked += 1
        if not cond:
            rep.violations.append({"check": name, "detail": detail})

    spec = two_chain_spec()
    m1, m2 = component_mags(spec)
    check("M1", m1.directed == {(0, 1)} and m1.bidirected == {(1, 2)}, repr(m1))
    check("M2", m2.directed == {(3, 2)} and m2.bidirected == {(1, 2)}, repr(m2))
    ok, _ = poset_compatible([m1, m2])
    check("chains poset compatible", ok)
    u = union_graph([m1, m2])
    check("M_union", u.directed == {(0, 1), (3, 2)} and u.bidirected == {(1, 2)}, repr(u))

    s2 = incompatible_spec()
    mags2 = component_mags(s2)
    ok2, witness = poset_compatible(mags2)
    check("incompatible order detected", not ok2, str(witness))
    u2 = union_graph_lenient(mags2)
    check("incompatible union non-ancestral", not is_ancestral(u2), repr(u2))

    crafted, perturbed = example31_density_gap()
    check("crafted density gap < 1e-10", crafted < 1e-10, crafted)
    check("perturbed density gap > 1e-6", perturbed > 1e-6, perturbed)

    mg = mother_graph(spec)
    check("mother graph: [1],[4] not m-d-connected given [2,3]", not m_d_connected(mg, {0}, {3}, {1, 2}))
    joint = exact_joint(mother_graph_counterexample())
    check("discrete analogue: X1 dependent on X4 given X2, X3", not exact_discrete_ci(joint, [0], [3], [1, 2]))
    return rep


# --- theorem suites


@_timed
def union_separation_suite(n_specs: int = 200, seed: int = 0, k_max: int = 3, n_max: int = 6, max_cond: int = 3) -> SuiteReport:
    """m-separation in the union MAG agrees with lifted d-separation in the mixture DAG."""
    rep = SuiteReport("union MAG separation equivalence")
    rng = np.random.default_rng(seed)
    for _ in range(n_specs):
        spec = random_compatible_spec(rng, k_max, n_max)
        u = union_graph(component_mags(spec))
        d, _ = mixture_dag(spec)
        rep.instances += 1
        for a, b in itertools.combinations(range(spec.n_nodes), 2):
            rest = [v for v in range(spec.n_nodes) if v not in (a, b)]
            for c in _subsets(rest, max_cond):
                rep.checked += 1
                lhs = m_separated(u, {a}, {b}, c)
                rhs = d_separated(d, spec.lift([a]), spec.lift([b]), spec.lift(c))
                if lhs != rhs:
                    rep.violations.append({"spec": spec.to_dict(), "query": [a, b, list(c)], "union": lhs, "mixture": rhs})
    return rep


def _all_queries(n):
    """Disjoint (A, B, C) with A, B nonempty, each unordered {A, B} once."""
    nodes = range(n)
    for assign in itertools.product(range(4), repeat=n):
        a = [v for v in nodes if assign[v] == 1]
        b = [v for v in nodes if assign[v] == 2]
        c = [v for v in nodes if assign[v] == 3]
        if a and b and min(a) < min(b):
            yield a, b, c


@_timed
def mixture_markov_suite(n_models: int = 100, seed: int = 1, n_max: int = 5, tol: float = 1e-9) -> SuiteReport:
    """Every lifted d-separation in the mixture DAG holds as exact CI in the mixture."""
    rep = SuiteReport("mixture Markov property (exact discrete)")
    rng = np.random.default_rng(seed)
    for _ in range(n_models):
        n = int(rng.integers(2, n_max + 1))
        spec = random_mixture_spec(rng, 2, n, p=0.45)
        w = rng.dirichlet([2, 2])
        spec = MixtureSpec(spec.components, spec.v_inv, tuple(w / w.sum()))
        dm = random_discrete_mixture(spec, rng)
        joint = exact_joint(dm)
        d, _ = mixture_dag(spec)
        rep.instances += 1
        for a, b, c in _all_queries(n):
            if d_separated(d, spec.lift(a), spec.lift(b), spec.lift(c)):
                rep.checked += 1
                if not exact_discrete_ci(joint, a, b, c, tol):
                    rep.violations.append({"spec": spec.to_dict(), "query": [a, b, c]})
    return rep


@_timed
def faithfulness_suite(n_models: int = 100, seed: int = 2, n_max: int = 5, tol: float = 1e-6) -> SuiteReport:
    """Lifted d-connection implies dependence for generic CPTs (budgeted, not a theorem)."""
    rep = SuiteReport("generic mixture faithfulness", theorem_backed=False)
    rng = np.random.default_rng(seed)
    failures = 0
    for _ in range(n_models):
        n = int(rng.integers(2, n_max + 1))
        spec = random_mixture_spec(rng, 2, n, p=0.45)
        dm = random_discrete_mixture(spec, rng)
        joint = exact_joint(dm)
        d, _ = mixture_dag(spec)
        rep.instances += 1
        bad = False
        for a, b, c in _all_queries(n):
            if not d_separated(d, spec.lift(a), spec.lift(b), spec.lift(c)):
                rep.checked += 1
                if exact_discrete_ci(joint, a, b, c, tol):
                    bad = True
                    break
        failures += bad
    if failures > 0.01 * n_models:
        rep.violations.append({"unfaithful_instances": failures, "of": n_models})
    return rep


@_timed
def marginal_mag_suite(n_graphs: int = 500, seed: int = 3, n_max: int = 6, skip_replacement: bool = False, brute_force_every: int = 5) -> SuiteReport:
    """Marginalized rooted DAGs are MAGs; every ``brute_force_every``-th is also checked definitionally."""
    rep = SuiteReport("marginalized root DAG is a MAG")
    rng = np.random.default_rng(seed)
    for i in range(n_graphs):
        n = int(rng.integers(1, n_max + 1))
        d, y = random_rooted_dag(rng, n)
        m = marginalize_root(d, y, skip_replacement=skip_replacement)
        rep.instances += 1
        rep.checked += 1
        if not is_ancestral(m):
            rep.violations.append({"dag": d.to_dict(), "root": y, "output": m.to_dict(), "reason": "not ancestral"})
            continue
        if not is_maximal(m):
            rep.violations.append({"dag": d.to_dict(), "root": y, "output": m.to_dict(), "reason": "inducing path"})
            continue
        if n <= 7 and i % brute_force_every == 0:
            rep.checked += 1
            if not is_maximal_brute_force(m):
                rep.violations.append({"dag": d.to_dict(), "root": y, "reason": "brute-force maximality"})
    return rep


@_timed
def union_mag_suite(n_specs: int = 500, seed: int = 4, brute_force_every: int = 5) -> SuiteReport:
    """Poset-compatible union graphs are MAGs."""
    rep = SuiteReport("compatible union graph is a MAG")
    rng = np.random.default_rng(seed)
    for i in range(n_specs):
        spec = random_compatible_spec(rng, 3, 6)
        u = union_graph(component_mags(spec))
        rep.instances += 1
        rep.checked += 1
        if not (is_ancestral(u) and is_maximal(u)):
            rep.violations.append({"spec": spec.to_dict(), "union": u.to_dict()})
            continue
        if i % brute_force_every == 0:
            rep.checked += 1
            if not is_maximal_brute_force(u):
                rep.violations.append({"spec": spec.to_dict(), "reason": "brute-force maximality"})
    return rep


@_timed
def varying_endpoint_suite(n_specs: int = 500, seed: int = 5) -> SuiteReport:
    """Nodes with bidirected edges in the union MAG are varying."""
    rep = SuiteReport("bidirected endpoints are varying")
    rng = np.random.default_rng(seed)
    for _ in range(n_specs):
        spec = random_compatible_spec(rng, 3, 6)
        u = union_graph(component_mags(spec))
        rep.instances += 1
        rep.checked += 1
        extra = varying_nodes(u) - spec.varying
        if extra:
            rep.violations.append({"spec": spec.to_dict(), "extra": sorted(extra)})
    return rep


@_timed
def separation_preservation_suite(n_graphs: int = 200, seed: int = 6, n_max: int = 5) -> SuiteReport:
    """d-separation among observed nodes survives root-marginalization marginalization."""
    rep = SuiteReport("marginalization preserves separation")
    rng = np.random.default_rng(seed)
    for _ in range(n_graphs):
        n = int(rng.integers(2, n_max + 1))
        d, y = random_rooted_dag(rng, n)
        m = marginalize_root(d, y)
        rep.instances += 1
        for a, b, c in _all_queries(n):
            rep.checked += 1
            if d_separated(d, a, b, c) != m_separated(m, a, b, c):
                rep.violations.append({"dag": d.to_dict(), "query": [a, b, c]})
    return rep


@_timed
def bidirected_connections_suite(n_specs: int = 200, seed: int = 7) -> SuiteReport:
    """In the mixture MAG, a^(i) <-> b^(k) implies a^(i) <-> b^(j) for every j != i."""
    rep = SuiteReport("bidirected edges repeat across components")
    rng = np.random.default_rng(seed)
    for _ in range(n_specs):
        k = int(rng.integers(2, 4))
        n = int(rng.integers(2, 6))
        spec = random_mixture_spec(rng, k, n)
        d, y = mixture_dag(spec)
        mm = mixture_mag(d, y)
        rep.instances += 1
        for u, v in mm.bidirected:
            for x, z in ((u, v), (v, u)):
                i, a = divmod(x, n)
                _, b = divmod(z, n)
                for j in range(k):
                    if j == i:
                        continue
                    rep.checked += 1
                    t = j * n + b
                    if not (mm.adjacent(x, t) and mm.mark(x, t) == "arrow" and mm.mark(t, x) == "arrow"):
                        rep.violations.append({"spec": spec.to_dict(), "edge": [x, z], "missing": [x, t]})
    return rep


def _n_bidirected(g, path):
    return sum(1 for u, v in zip(path, path[1:]) if (min(u, v), max(u, v)) in g.bidirected)


@_timed
def single_bidirected_path_suite(n_specs: int = 60, seed: int = 10, n_max: int = 4, max_cond: int = 2) -> SuiteReport:
    """m-connection in the mixture MAG is always witnessed by a path with at most one bidirected edge."""
    rep = SuiteReport("connecting paths need at most one bidirected edge")
    rng = np.random.default_rng(seed)
    for _ in range(n_specs):
        n = int(rng.integers(2, n_max + 1))
        spec = random_mixture_spec(rng, 2, n)
        d, y = mixture_dag(spec)
        mm = mixture_mag(d, y)
        rep.instances += 1
        for x, z in itertools.combinations(range(mm.n_nodes), 2):
            rest = [v for v in range(n) if v not in (x % n, z % n)]
            for c in _subsets(rest, max_cond):
                cond = spec.lift(c)
                if m_separated(mm, {x}, {z}, cond):
                    continue
                rep.checked += 1
                if not any(
                    _n_bidirected(mm, p) <= 1 and path_is_open(mm, p, cond) for p in simple_paths(mm, x, z)
                ):
                    rep.violations.append({"spec": spec.to_dict(), "pair": [x, z], "cond": sorted(cond)})
    return rep


@_timed
def fci_oracle_suite(n_graphs: int = 100, seed: int = 8, n_max: int = 6) -> SuiteReport:
    """FCI with an exact separation oracle recovers the brute-force PAG."""
    rep = SuiteReport("FCI oracle consistency vs brute-force PAG")
    rng = np.random.default_rng(seed)
    for _ in range(n_graphs):
        n = int(rng.integers(2, n_max + 1))
        m = random_mag(rng, n)
        rep.instances += 1
        rep.checked += 1
        got = fci(graphical_oracle(m), n, labels=m.labels)
        want = brute_force_pag(m)
        if got != want:
            rep.violations.append({"mag": m.to_dict(), "fci": got.to_dict(), "brute_force": want.to_dict()})
    return rep


def _oracle_instances(n_models, seed, n_max):
    rng = np.random.default_rng(seed)
    for _ in range(n_models):
        spec = random_compatible_spec(rng, 3, n_max, n_min=3)
        joint = exact_joint(random_discrete_mixture(spec, rng))
        u = union_graph(component_mags(spec))
        got = fci(ExactDiscreteOracle(joint), spec.n_nodes, labels=spec.labels)
        yield spec, u, got


@_timed
def oracle_end_to_end_suite(n_models: int = 50, seed: int = 9, n_max: int = 5) -> SuiteReport:
    """FCI on exact mixture CI recovers the PAG of the union MAG.

    Also checks that every definite bidirected edge of that PAG marks a varying node (fpr 0).
    """
    rep = SuiteReport("FCI on exact mixture CI gives PAG of union MAG")
    for spec, u, got in _oracle_instances(n_models, seed, n_max):
        want = brute_force_pag(u)
        rep.instances += 1
        rep.checked += 3
        shd = normalized_shd(got, want)
        _, fpr = varying_rates(varying_nodes_from_pag(got), varying_nodes(u), range(spec.n_nodes))
        if got != want or shd != 0 or fpr != 0:
            rep.violations.append(
                {"spec": spec.to_dict(), "fci": got.to_dict(), "brute_force": want.to_dict(), "shd": shd, "fpr": fpr}
            )
    return rep


@_timed
def varying_identifiability_suite(n_models: int = 50, seed: int = 9, n_max: int = 5) -> SuiteReport:
    """Every union bidirected edge shows up as a definite arrow-arrow edge in the oracle PAG.

    Not a theorem: a lone bidirected edge is Markov equivalent to a directed one, so its
    PAG edge keeps circle marks and the varying tpr drops below 1.
    """
    rep = SuiteReport("varying nodes of union MAG all identified from oracle PAG", theorem_backed=False)
    for spec, u, got in _oracle_instances(n_models, seed, n_max):
        rep.instances += 1
        rep.checked += 1
        rates = varying_rates(varying_nodes_from_pag(got), varying_nodes(u), range(spec.n_nodes))
        if rates != (1.0, 0.0):
            rep.violations.append({"spec": spec.to_dict(), "union": u.to_dict(), "pag": got.to_dict(), "rates": rates})
    return rep


SUITES = {
    "fixtures": fixture_suite,
    "union_separation": union_separation_suite,
    "mixture_markov": mixture_markov_suite,
    "faithfulness": faithfulness_suite,
    "marginal_mag": marginal_mag_suite,
    "union_mag": union_mag_suite,
    "varying_endpoints": varying_endpoint_suite,
    "preservation": separation_preservation_suite,
    "bidirected_repeat": bidirected_connections_suite,
    "single_bidirected": single_bidirected_path_suite,
    "fci_oracle": fci_oracle_suite,
    "oracle_end_to_end": oracle_end_to_end_suite,
    "varying_identifiability": varying_identifiability_suite,
}


def run_all(seed: int = 0, scale: float = 1.0, inject_bug: bool = False) -> list[SuiteReport]:
    """Run every suite; ``scale`` multiplies instance budgets, ``inject_bug`` breaks root marginalization."""

    def s(x):
        return max(1, int(round(x * scale)))

    reports = [
        fixture_suite(),
        union_separation_suite(s(200), seed),
        mixture_markov_suite(s(100), seed + 1),
        faithfulness_suite(s(100), seed + 2),
        marginal_mag_suite(s(500), seed + 3, skip_replacement=inject_bug),
        union_mag_suite(s(500), seed + 4),
        varying_endpoint_suite(s(500), seed + 5),
        separation_preservation_suite(s(200), seed + 6),
        bidirected_connections_suite(s(200), seed + 7),
        single_bidirected_path_suite(s(60), seed + 10),
        fci_oracle_suite(s(100), seed + 8),
        oracle_end_to_end_suite(s(50), seed + 9),
        varying_identifiability_suite(s(50), seed + 9),
    ]
    return reports
