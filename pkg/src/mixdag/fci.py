"""The FCI algorithm over a conditional-independence oracle.

Internally the partially oriented graph is an integer matrix ``m`` where
``m[i, j]`` is the mark at ``j`` on the edge between ``i`` and ``j``
(0 = no edge). Orientation uses Zhang's rules R1-R4 and R8-R10; R5-R7 only
fire on undirected edges, which cannot arise without selection variables.
"""

from __future__ import annotations

import itertools
import logging
from collections import Counter, deque
from dataclasses import dataclass, field

import numpy as np

from .ci import CiOracle, FisherZOracle
from .graph_core import ARROW, CIRCLE, TAIL, MixedGraph, Pag
from .separation import is_ancestral, m_separated

log = logging.getLogger(__name__)

NONE, CIR, ARR, TL = 0, 1, 2, 3
_TO_MARK = {CIR: CIRCLE, ARR: ARROW, TL: TAIL}
_FROM_MARK = {v: k for k, v in _TO_MARK.items()}


class FciError(RuntimeError):
    def __init__(self, query, cause):
        self.query = query
        super().__init__(f"oracle failed on query {query}: {cause}")


@dataclass
class SepsetTable:
    """Separating set recorded for each removed adjacency."""

    sets: dict[tuple[int, int], frozenset[int]] = field(default_factory=dict)

    def set(self, a: int, b: int, s) -> None:
        self.sets[(min(a, b), max(a, b))] = frozenset(s)

    def get(self, a: int, b: int) -> frozenset[int] | None:
        return self.sets.get((min(a, b), max(a, b)))

    def verify(self, oracle: CiOracle) -> bool:
        return all(oracle.independent(a, b, s) for (a, b), s in self.sets.items())


@dataclass
class FciResult:
    pag: Pag
    sepsets: SepsetTable
    n_tests: int


def _ask(oracle, a, b, s):
    try:
        return oracle.independent(a, b, s)
    except Exception as exc:  # noqa: BLE001 - rewrapped with the query
        raise FciError((a, b, tuple(s)), exc) from exc


def _adj(m, v):
    return [int(w) for w in np.flatnonzero(m[v])]


def skeleton(oracle, n: int, m=None, sepsets=None, max_depth: int | None = None):
    """Adjacency search with level-wise frozen neighbourhoods (order independent)."""
    if m is None:
        m = np.full((n, n), CIR, dtype=np.int8)
        np.fill_diagonal(m, NONE)
    sepsets = sepsets or SepsetTable()
    level = 0
    while True:
        adj = [_adj(m, v) for v in range(n)]
        if all(len(a) - 1 < level for a in adj):
            break
        if max_depth is not None and level > max_depth:
            break
        for a in range(n):
            for b in adj[a]:
                if not m[a, b]:
                    continue
                others = [v for v in adj[a] if v != b]
                if len(others) < level:
                    continue
                for s in itertools.combinations(others, level):
                    if _ask(oracle, a, b, s):
                        m[a, b] = m[b, a] = NONE
                        sepsets.set(a, b, s)
                        break
        level += 1
    return m, sepsets


def orient_colliders(m, sepsets):
    n = m.shape[0]
    for b in range(n):
        nb = _adj(m, b)
        for a, c in itertools.combinations(nb, 2):
            if m[a, c]:
                continue
            s = sepsets.get(a, c)
            if s is not None and b not in s:
                m[a, b] = ARR
                m[c, b] = ARR


def possible_d_sep(m, a: int) -> set[int]:
    """Nodes reachable from ``a`` along paths whose interior nodes are colliders or in triangles."""
    out = set()
    seen = set()
    queue = deque()
    for w in _adj(m, a):
        seen.add((a, w))
        queue.append((a, w))
        out.add(w)
    while queue:
        prev, cur = queue.popleft()
        for nxt in _adj(m, cur):
            if nxt == prev or nxt == a or (cur, nxt) in seen:
                continue
            collider = m[prev, cur] == ARR and m[nxt, cur] == ARR
            if collider or m[prev, nxt]:
                seen.add((cur, nxt))
                queue.append((cur, nxt))
                out.add(nxt)
    out.discard(a)
    return out


def pds_phase(oracle, m, sepsets, max_size: int | None):
    n = m.shape[0]
    pds = [possible_d_sep(m, v) for v in range(n)]
    for a in range(n):
        for b in range(a + 1, n):
            if not m[a, b]:
                continue
            removed = False
            for x, y in ((a, b), (b, a)):
                cand = sorted(pds[x] - {x, y})
                top = len(cand) if max_size is None else min(max_size, len(cand))
                for size in range(top + 1):
                    for s in itertools.combinations(cand, size):
                        if _ask(oracle, x, y, s):
                            m[a, b] = m[b, a] = NONE
                            sepsets.set(a, b, s)
                            removed = True
                            break
                    if removed:
                        break
                if removed:
                    break


# --- orientation rules


def _is_pd_edge(m, u, v):
    """Edge u *-* v could be oriented u -> v (no arrow at u, no tail at v)."""
    return m[u, v] != NONE and m[v, u] != ARR and m[u, v] != TL


def _rule1(m):
    changed = False
    n = m.shape[0]
    for b in range(n):
        for a in _adj(m, b):
            if m[a, b] != ARR:
                continue
            for c in _adj(m, b):
                if c == a or m[a, c] or m[c, b] != CIR:
                    continue
                m[b, c] = ARR
                m[c, b] = TL
                changed = True
    return changed


def _rule2(m):
    changed = False
    n = m.shape[0]
    for a in range(n):
        for c in _adj(m, a):
            if m[a, c] != CIR:
                continue
            for b in _adj(m, a):
                if b == c or not m[b, c]:
                    continue
                a_to_b = m[a, b] == ARR and m[b, a] == TL
                b_to_c = m[b, c] == ARR and m[c, b] == TL
                if (a_to_b and m[b, c] == ARR) or (m[a, b] == ARR and b_to_c):
                    m[a, c] = ARR
                    changed = True
                    break
    return changed


def _rule3(m):
    changed = False
    n = m.shape[0]
    for b in range(n):
        into = [v for v in _adj(m, b) if m[v, b] == ARR]
        for a, c in itertools.combinations(into, 2):
            if m[a, c]:
                continue
            for t in _adj(m, b):
                if t in (a, c) or m[b, t] == NONE:
                    continue
                if m[t, b] != CIR:
                    continue
                if m[a, t] == CIR and m[c, t] == CIR:
                    m[t, b] = ARR
                    changed = True
    return changed


def _discriminating_theta(m, alpha_start, b, c):
    """Search a discriminating path ``<theta, ..., alpha, b, c>`` for ``b``; returns theta or None."""
    # nodes between theta and b must be colliders and parents of c
    prev = {alpha_start: b}
    queue = deque([alpha_start])
    while queue:
        x = queue.popleft()
        for w in _adj(m, x):
            if w in prev or w == c or w == b:
                continue
            if m[w, x] != ARR:
                continue
            if not m[w, c]:
                return w
            if m[w, c] == ARR and m[c, w] == TL and m[x, w] == ARR:
                prev[w] = x
                queue.append(w)
    return None


def _rule4(m, sepsets):
    changed = False
    n = m.shape[0]
    for b in range(n):
        for c in _adj(m, b):
            if m[c, b] != CIR:
                continue
            for a in _adj(m, b):
                if a == c:
                    continue
                if not (m[a, c] == ARR and m[c, a] == TL and m[b, a] == ARR):
                    continue
                theta = _discriminating_theta(m, a, b, c)
                if theta is None:
                    continue
                s = sepsets.get(theta, c)
                if s is not None and b in s:
                    m[b, c] = ARR
                    m[c, b] = TL
                else:
                    m[a, b] = ARR
                    m[c, b] = ARR
                    m[b, c] = ARR
                changed = True
                break
    return changed


def _rule8(m):
    changed = False
    n = m.shape[0]
    for a in range(n):
        for c in _adj(m, a):
            if not (m[a, c] == ARR and m[c, a] == CIR):
                continue
            for b in _adj(m, a):
                if b == c or not m[b, c]:
                    continue
                b_to_c = m[b, c] == ARR and m[c, b] == TL
                first = m[a, b] == ARR and m[b, a] == TL
                first_alt = m[a, b] == CIR and m[b, a] == TL
                if b_to_c and (first or first_alt):
                    m[c, a] = TL
                    changed = True
                    break
    return changed


def _uncovered_pd_paths(m, start, second, end, max_len=None):
    """Yield uncovered potentially directed paths start, second, ..., end."""
    if not _is_pd_edge(m, start, second):
        return
    stack = [[start, second]]
    while stack:
        path = stack.pop()
        last = path[-1]
        if last == end:
            yield path
            continue
        for w in _adj(m, last):
            if w in path:
                continue
            if m[path[-2], w]:  # triple must be unshielded
                continue
            if not _is_pd_edge(m, last, w):
                continue
            stack.append(path + [w])


def _rule9(m):
    changed = False
    n = m.shape[0]
    for a in range(n):
        for c in _adj(m, a):
            if not (m[a, c] == ARR and m[c, a] == CIR):
                continue
            for b in _adj(m, a):
                if b == c or m[b, c]:
                    continue
                if any(True for _ in _uncovered_pd_paths(m, a, b, c)):
                    m[c, a] = TL
                    changed = True
                    break
    return changed


def _rule10(m):
    changed = False
    n = m.shape[0]
    for a in range(n):
        for c in _adj(m, a):
            if not (m[a, c] == ARR and m[c, a] == CIR):
                continue
            parents = [v for v in _adj(m, c) if v != a and m[v, c] == ARR and m[c, v] == TL]
            done = False
            for b, t in itertools.combinations(parents, 2):
                firsts_b = _pd_first_nodes(m, a, b)
                firsts_t = _pd_first_nodes(m, a, t)
                for mu in firsts_b:
                    for om in firsts_t:
                        if mu != om and not m[mu, om]:
                            m[c, a] = TL
                            changed = done = True
                            break
                    if done:
                        break
                if done:
                    break
    return changed


def _pd_first_nodes(m, a, target):
    """Second nodes of uncovered p.d. paths from ``a`` to ``target`` (``target`` itself if adjacent)."""
    out = set()
    for mu in _adj(m, a):
        if mu in out:
            continue
        if mu == target:
            if _is_pd_edge(m, a, mu):
                out.add(mu)
            continue
        if any(True for _ in _uncovered_pd_paths(m, a, mu, target)):
            out.add(mu)
    return out


def apply_rules(m, sepsets, max_rounds: int = 1000):
    for _ in range(max_rounds):
        changed = _rule1(m)
        changed |= _rule2(m)
        changed |= _rule3(m)
        changed |= _rule4(m, sepsets)
        changed |= _rule8(m)
        changed |= _rule9(m)
        changed |= _rule10(m)
        if not changed:
            return m
    log.warning("orientation rules did not converge in %d rounds", max_rounds)
    return m


def _to_pag(m, labels=None) -> Pag:
    n = m.shape[0]
    marks = {}
    for u in range(n):
        for v in range(u + 1, n):
            if m[u, v]:
                marks[(u, v)] = (_TO_MARK[int(m[v, u])], _TO_MARK[int(m[u, v])])
    return Pag(n, marks, labels)


def fci_full(
    oracle: CiOracle,
    n_nodes: int,
    *,
    labels=None,
    max_pds_size: int | None = -1,
    skip_pds: bool = False,
) -> FciResult:
    """FCI returning the PAG together with its separating sets.

    ``max_pds_size=-1`` picks the default cap: unlimited up to 10 nodes, 4 above.
    """
    if max_pds_size == -1:
        max_pds_size = None if n_nodes <= 10 else 4
    m, sepsets = skeleton(oracle, n_nodes)
    if not skip_pds:
        orient_colliders(m, sepsets)
        pds_phase(oracle, m, sepsets, max_pds_size)
        m[m != NONE] = CIR
    orient_colliders(m, sepsets)
    apply_rules(m, sepsets)
    return FciResult(_to_pag(m, labels), sepsets, getattr(oracle, "n_queries", 0))


def fci(oracle: CiOracle, n_nodes: int, **kw) -> Pag:
    return fci_full(oracle, n_nodes, **kw).pag


# --- stability selection


def fci_stability_selection(
    data: np.ndarray,
    alpha: float = 0.05,
    n_subsamples: int = 50,
    keep_fraction: float = 0.5,
    threshold: float = 0.6,
    seed=None,
    labels=None,
) -> Pag:
    """FCI with Fisher-z on row subsamples, keeping frequently found adjacencies.

    Endpoint marks are the majority over the runs that contain the adjacency;
    a tie for the most frequent mark yields a circle.
    """
    if n_subsamples < 2:
        raise ValueError("n_subsamples must be at least 2")
    if not 0 < keep_fraction < 1:
        raise ValueError("keep_fraction must lie in (0, 1)")
    data = np.asarray(data, dtype=float)
    rng = np.random.default_rng(seed)
    n, p = data.shape
    size = max(int(keep_fraction * n), 1)
    runs = []
    for _ in range(n_subsamples):
        rows = np.sort(rng.choice(n, size=size, replace=False))
        runs.append(fci(FisherZOracle(data[rows], alpha), p))
    counts: dict[tuple[int, int], list] = {}
    for pag in runs:
        for key, mm in pag.marks.items():
            counts.setdefault(key, []).append(mm)
    marks = {}
    for key in sorted(counts):
        found = counts[key]
        freq = len(found) / n_subsamples
        if freq < threshold:
            continue
        ends = []
        for side in (0, 1):
            c = Counter(mm[side] for mm in found).most_common()
            if len(c) > 1 and c[0][1] == c[1][1]:
                ends.append(CIRCLE)
            else:
                ends.append(c[0][0])
        marks[key] = tuple(ends)
    return Pag(p, marks, labels)


# --- brute-force reference PAG


def _edge_options():
    # (mark at u, mark at v) for u < v
    return ((TAIL, ARROW), (ARROW, TAIL), (ARROW, ARROW))


def markov_equivalent_mags(g: MixedGraph, max_nodes: int = 7) -> list[MixedGraph]:
    """Every MAG with the same m-separations as ``g`` (enumeration; small graphs only).

    Candidates share the skeleton (a MAG's adjacencies are exactly its
    inseparable pairs). Assignments that disagree on an unshielded collider
    are pruned early; survivors are compared on every separation statement.
    """
    n = g.n_nodes
    if n > max_nodes:
        raise ValueError(f"brute force limited to {max_nodes} nodes")
    edges = [(u, v) for u, v, _, _ in g.edges()]
    index = {e: i for i, e in enumerate(edges)}
    triples = []
    for b in range(n):
        nb = sorted(g.neighbors(b))
        for a, c in itertools.combinations(nb, 2):
            if not g.adjacent(a, c):
                collider = g.mark(a, b) == ARROW and g.mark(c, b) == ARROW
                ea = index[(min(a, b), max(a, b))]
                ec = index[(min(c, b), max(c, b))]
                triples.append((a, b, c, ea, ec, collider))
    by_last = [[] for _ in edges]
    for t in triples:
        by_last[max(t[3], t[4])].append(t)

    nonadj = [(u, v) for u, v in itertools.combinations(range(n), 2) if not g.adjacent(u, v)]
    reference = {}
    for u, v in nonadj:
        rest = [w for w in range(n) if w not in (u, v)]
        for k in range(len(rest) + 1):
            for s in itertools.combinations(rest, k):
                reference[(u, v, s)] = m_separated(g, {u}, {v}, s)

    def mark_at(assign, e, node):
        u, v = edges[e]
        mu, mv = assign[e]
        return mu if node == u else mv

    out = []
    assign = [None] * len(edges)

    def rec(i):
        if i == len(edges):
            d = [(u, v) if mv == ARROW and mu == TAIL else (v, u) for (u, v), (mu, mv) in zip(edges, assign) if mu != mv]
            b = [(u, v) for (u, v), (mu, mv) in zip(edges, assign) if mu == mv]
            cand = MixedGraph(n, d, b, g.labels)
            if not is_ancestral(cand):
                return
            for (u, v, s), sep in reference.items():
                if m_separated(cand, {u}, {v}, s) != sep:
                    return
            out.append(cand)
            return
        for opt in _edge_options():
            assign[i] = opt
            ok = True
            for a, b_, c, ea, ec, collider in by_last[i]:
                col = mark_at(assign, ea, b_) == ARROW and mark_at(assign, ec, b_) == ARROW
                if col != collider:
                    ok = False
                    break
            if ok:
                rec(i + 1)
        assign[i] = None

    rec(0)
    return out


def brute_force_pag(g: MixedGraph, max_nodes: int = 7) -> Pag:
    """PAG of ``g`` by enumerating its Markov equivalence class."""
    eq = markov_equivalent_mags(g, max_nodes)
    marks = {}
    for u, v, _, _ in g.edges():
        seen_u = {h.mark(v, u) for h in eq}
        seen_v = {h.mark(u, v) for h in eq}
        mu = seen_u.pop() if len(seen_u) == 1 else CIRCLE
        mv = seen_v.pop() if len(seen_v) == 1 else CIRCLE
        marks[(u, v)] = (mu, mv)
    return Pag(g.n_nodes, marks, g.labels)
