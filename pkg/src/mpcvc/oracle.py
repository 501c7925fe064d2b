"""Ground truth and analysis machinery.

Exact minimum vertex cover (branch and bound plus an exhaustive checker),
maximal-matching bounds, the hypothetical peeling process that knows a
fixed cover ``O*``, and the sandwich audit comparing it with a parallel run.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .graph import Graph, ParameterError, SeedLike, as_mask, as_seed, is_vertex_cover, mask_to_set

EXACT_VERTEX_LIMIT = 60


class OracleRefusal(ValueError):
    """The exact solver refuses inputs beyond its tractability bound."""


# -- matchings ---------------------------------------------------------------

def greedy_maximal_matching(g: Graph, alive=None, seed: Optional[SeedLike] = None) -> list:
    """Scan edges (in seeded random order if ``seed`` is given) and keep
    every edge whose endpoints are both still free."""
    e = g.edges
    if alive is not None:
        mask = as_mask(alive, g.n)
        e = e[mask[e[:, 0]] & mask[e[:, 1]]]
    if seed is not None and e.shape[0]:
        e = e[as_seed(seed).generator().permutation(e.shape[0])]
    matched = bytearray(g.n)
    out = []
    for u, v in e.tolist():
        if not matched[u] and not matched[v]:
            matched[u] = matched[v] = 1
            out.append((u, v))
    return out


def matching_cover(g: Graph, alive=None, seed: Optional[SeedLike] = None) -> frozenset:
    """Endpoints of a maximal matching: a 2-approximate vertex cover."""
    return frozenset(v for edge in greedy_maximal_matching(g, alive, seed) for v in edge)


# -- exact minimum vertex cover ----------------------------------------------

def _bit_adjacency(g: Graph):
    verts = np.flatnonzero(g.degrees > 0).tolist()
    index = {v: i for i, v in enumerate(verts)}
    adj = [0] * len(verts)
    for u, v in g.edges.tolist():
        a, b = index[u], index[v]
        adj[a] |= 1 << b
        adj[b] |= 1 << a
    return verts, adj


def _matching_lower_bound(adj, alive: int) -> int:
    free = alive
    size = 0
    rest = alive
    while rest:
        low = rest & -rest
        v = low.bit_length() - 1
        rest ^= low
        if not free & low:
            continue
        cand = adj[v] & free
        if cand:
            u = (cand & -cand)
            free &= ~(low | u)
            rest &= ~u
            size += 1
    return size


def exact_min_vc(g: Graph, limit: int = EXACT_VERTEX_LIMIT) -> frozenset:
    """Minimum vertex cover by branch and bound.

    Branches on a maximum-degree vertex v: either v is in the cover, or all
    of N(v) is.  A greedy maximal matching of the remaining graph lower
    bounds what is still needed and prunes the search.  ``limit`` caps the
    number of non-isolated vertices.
    """
    verts, adj = _bit_adjacency(g)
    k = len(verts)
    if k > limit:
        raise OracleRefusal(f"{k} non-isolated vertices exceed the exact-solver limit {limit}")
    if k == 0:
        return frozenset()

    best_size = k
    best_set = (1 << k) - 1

    def search(alive: int, chosen: int, size: int):
        nonlocal best_size, best_set
        top, top_deg = -1, 0
        rest = alive
        while rest:
            low = rest & -rest
            v = low.bit_length() - 1
            rest ^= low
            d = (adj[v] & alive).bit_count()
            if d > top_deg:
                top, top_deg = v, d
        if top_deg == 0:
            if size < best_size:
                best_size, best_set = size, chosen
            return
        if size + _matching_lower_bound(adj, alive) >= best_size:
            return
        bit = 1 << top
        search(alive & ~bit, chosen | bit, size + 1)
        nbrs = adj[top] & alive
        search(alive & ~(nbrs | bit), chosen | nbrs, size + nbrs.bit_count())

    search((1 << k) - 1, 0, 0)
    return frozenset(verts[i] for i in range(k) if best_set >> i & 1)


def brute_force_min_vc(g: Graph, limit: int = 20) -> frozenset:
    """Smallest covering subset by enumeration in order of size."""
    verts, _ = _bit_adjacency(g)
    if len(verts) > limit:
        raise OracleRefusal(f"{len(verts)} vertices is too many for enumeration")
    index = {v: i for i, v in enumerate(verts)}
    edge_masks = [(1 << index[u]) | (1 << index[v]) for u, v in g.edges.tolist()]
    for size in range(len(verts) + 1):
        for combo in itertools.combinations(range(len(verts)), size):
            c = 0
            for i in combo:
                c |= 1 << i
            if all(c & em for em in edge_masks):
                return frozenset(verts[i] for i in combo)
    raise AssertionError("unreachable: the full vertex set is a cover")


# -- hypothetical process ----------------------------------------------------

@dataclass(frozen=True)
class HypotheticalTrace:
    """Peels of the analysis-only process, indexed [phase][iteration].

    ``opt_side[i][t]`` are the vertices of ``O*`` removed at degree
    >= Δ_i/2^t, ``other_side[i][t]`` the vertices outside ``O*`` removed at
    degree >= Δ_i/2^(t+2), both measured in the bipartite residual graph.
    """

    opt_cover: frozenset
    thresholds: tuple
    iterations: tuple
    opt_side: tuple
    other_side: tuple
    n: int

    @property
    def opt_phase(self) -> list:
        return [frozenset().union(*ph) for ph in self.opt_side]

    @property
    def other_phase(self) -> list:
        return [frozenset().union(*ph) for ph in self.other_side]

    @property
    def total_iterations(self) -> int:
        return sum(self.iterations)

    @property
    def peeled(self) -> frozenset:
        return frozenset().union(*self.opt_phase, *self.other_phase)


def bipartite_residual(g: Graph, opt_cover) -> np.ndarray:
    """Edges of ``g`` with at least one endpoint outside ``opt_cover``."""
    mask = as_mask(opt_cover, g.n)
    e = g.edges
    return e[~(mask[e[:, 0]] & mask[e[:, 1]])]


def residual_after(g: Graph, hyp: HypotheticalTrace, phase: int, iteration: int) -> np.ndarray:
    """Edges of H_{phase, iteration} (1-based) rebuilt from the trace."""
    removed = np.zeros(g.n, dtype=bool)
    for i, (o_ph, b_ph) in enumerate(zip(hyp.opt_side, hyp.other_side), start=1):
        for t, (o, b) in enumerate(zip(o_ph, b_ph), start=1):
            if (i, t) >= (phase, iteration):
                break
            removed[list(o | b)] = True
    e = bipartite_residual(g, hyp.opt_cover)
    return e[~(removed[e[:, 0]] | removed[e[:, 1]])]


def hypothetical_process(g: Graph, opt_cover, schedule) -> HypotheticalTrace:
    """Run the process for every phase of ``schedule``.

    Each phase runs as many iterations as the parallel algorithm's local
    peeling does in that phase; both sides of an iteration are computed
    from the same residual graph before either is removed.
    """
    if not is_vertex_cover(g, opt_cover):
        raise ParameterError("opt_cover is not a vertex cover of g")
    opt = as_mask(opt_cover, g.n)
    e = bipartite_residual(g, opt)
    opt_side, other_side = [], []
    for d_i, iters in zip(schedule.thresholds, schedule.iterations):
        o_ph, b_ph = [], []
        for t in range(1, iters + 1):
            if e.shape[0] == 0:
                o_ph.append(frozenset())
                b_ph.append(frozenset())
                continue
            deg = np.bincount(e[:, 0], minlength=g.n) + np.bincount(e[:, 1], minlength=g.n)
            o_hit = opt & (deg >= d_i / 2 ** t) & (deg > 0)
            b_hit = ~opt & (deg >= d_i / 2 ** (t + 2)) & (deg > 0)
            o_ph.append(mask_to_set(o_hit))
            b_ph.append(mask_to_set(b_hit))
            hit = o_hit | b_hit
            e = e[~(hit[e[:, 0]] | hit[e[:, 1]])]
        opt_side.append(tuple(o_ph))
        other_side.append(tuple(b_ph))
    return HypotheticalTrace(frozenset(int(v) for v in np.flatnonzero(opt)),
                             tuple(schedule.thresholds[:schedule.num_phases]),
                             tuple(schedule.iterations), tuple(opt_side),
                             tuple(other_side), g.n)


def hypothetical_size_bound(trace: HypotheticalTrace, opt_size: int) -> bool:
    """|⋃ O_i ∪ Ō_i| <= (8 * iterations + 1) * opt_size."""
    return len(trace.peeled) <= (8 * trace.total_iterations + 1) * opt_size


def per_iteration_counts_ok(trace: HypotheticalTrace, cover_size: int) -> bool:
    """Every Ō_{i,t} has at most 8 * cover_size vertices."""
    return all(len(b) <= 8 * cover_size for ph in trace.other_side for b in ph)


# -- sandwich audit ----------------------------------------------------------

@dataclass
class SandwichReport:
    a_sets: list
    b_sets: list
    a_superset_o: list
    b_subset_obar: list
    violation: Optional[dict] = None
    cover_source: str = "unspecified"

    @property
    def holds(self) -> bool:
        return self.violation is None

    def to_dict(self) -> dict:
        return {
            "cover_source": self.cover_source,
            "phases": [{"i": i, "A_superset_O": a, "B_subset_Obar": b}
                       for i, (a, b) in enumerate(zip(self.a_superset_o, self.b_subset_obar), start=1)],
            "violation": self.violation,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=False)


def sandwich_audit(mpc, hyp: HypotheticalTrace, cover_source: str = "unspecified") -> SandwichReport:
    """Check the prefix inclusions A_{<=i} ⊇ O_{<=i} and B_{<=i} ⊆ Ō_{<=i}."""
    sched = mpc.schedule
    if sched is None:
        if hyp.thresholds:
            raise ParameterError("traces come from different schedules")
        return SandwichReport([], [], [], [], None, cover_source)
    if (tuple(sched.thresholds[:sched.num_phases]) != hyp.thresholds
            or tuple(sched.iterations) != hyp.iterations):
        raise ParameterError("traces come from different schedules")
    opt = hyp.opt_cover
    a_sets, b_sets, a_ok, b_ok = [], [], [], []
    a_pre, b_pre, o_pre, ob_pre = set(), set(), set(), set()
    violation = None
    for i, (p_i, o_i, ob_i) in enumerate(zip(mpc.peeled_per_phase, hyp.opt_phase, hyp.other_phase),
                                         start=1):
        a_i = p_i & opt
        b_i = p_i - opt
        a_sets.append(a_i)
        b_sets.append(b_i)
        a_pre |= a_i
        b_pre |= b_i
        o_pre |= o_i
        ob_pre |= ob_i
        missing = o_pre - a_pre
        extra = b_pre - ob_pre
        a_ok.append(not missing)
        b_ok.append(not extra)
        if violation is None and missing:
            violation = {"phase": i, "side": "A", "witness_vertex": min(missing)}
        elif violation is None and extra:
            violation = {"phase": i, "side": "B", "witness_vertex": min(extra)}
    return SandwichReport(a_sets, b_sets, a_ok, b_ok, violation, cover_source)
