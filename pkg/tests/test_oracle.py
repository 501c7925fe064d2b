import dataclasses
import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from mpcvc.graph import (Graph, ParameterError, complete_graph, cycle_graph, gen_gnp,
                         is_vertex_cover, path_graph, petersen_graph, star_graph)
from mpcvc.mpc import MpcConfig, parallel_peel
from mpcvc.oracle import (OracleRefusal, brute_force_min_vc, bipartite_residual, exact_min_vc,
                          greedy_maximal_matching, hypothetical_process, hypothetical_size_bound,
                          matching_cover, per_iteration_counts_ok, residual_after,
                          sandwich_audit)
from mpcvc.peeling import make_schedule
from strategies import graphs


@pytest.mark.parametrize("g, size", [
    (Graph.empty(0), 0),
    (Graph.empty(5), 0),
    (cycle_graph(4), 2),
    (cycle_graph(5), 3),
    (petersen_graph(), 6),
    (complete_graph(5), 4),
    (star_graph(9), 1),
    (path_graph(7), 3),
])
def test_exact_fixtures(g, size):
    cover = exact_min_vc(g)
    assert len(cover) == size and is_vertex_cover(g, cover)


def test_exact_refuses_large():
    with pytest.raises(OracleRefusal):
        exact_min_vc(complete_graph(12), limit=10)


def test_exact_ignores_isolated_for_limit():
    g = Graph.from_edges(500, [(0, 1), (2, 3)])
    assert len(exact_min_vc(g, limit=10)) == 2


def _subset_search(g):
    # independent of the solver: plain enumeration over tuples of vertices
    edges = g.edge_set()
    for k in range(g.n + 1):
        for c in itertools.combinations(range(g.n), k):
            cs = set(c)
            if all(u in cs or v in cs for u, v in edges):
                return k


@settings(max_examples=80, deadline=None)
@given(graphs(max_n=11))
def test_exact_matches_enumeration(g):
    assert len(exact_min_vc(g)) == _subset_search(g)
    assert len(brute_force_min_vc(g)) == _subset_search(g)


def test_exact_handles_n40_quickly():
    g = gen_gnp(40, 0.3, 5)
    assert is_vertex_cover(g, exact_min_vc(g))


def test_matching_examples():
    assert greedy_maximal_matching(Graph.empty(3)) == []
    assert greedy_maximal_matching(path_graph(2)) == [(0, 1)]
    for seed in range(10):
        m = greedy_maximal_matching(complete_graph(4), seed=seed)
        assert len(m) == 2 and len({v for e in m for v in e}) == 4


@settings(max_examples=60, deadline=None)
@given(graphs(max_n=12), st.integers(0, 100))
def test_matching_sandwiches_opt(g, seed):
    m = greedy_maximal_matching(g, seed=seed)
    opt = len(exact_min_vc(g))
    assert len(m) <= opt <= 2 * len(m)
    assert is_vertex_cover(g, matching_cover(g, seed=seed))


def test_hypothetical_empty():
    sch = make_schedule(64, 64, 2)
    hyp = hypothetical_process(Graph.empty(64), set(), sch)
    assert hyp.peeled == frozenset()
    assert hypothetical_size_bound(hyp, 0)


def test_hypothetical_star():
    g = star_graph(63)
    sch = make_schedule(64, 64, 2)
    hyp = hypothetical_process(g, {0}, sch)
    assert 0 in hyp.opt_side[0][0]
    assert all(not b for ph in hyp.other_side for b in ph)
    assert hypothetical_size_bound(hyp, 1)


def test_hypothetical_rejects_non_cover():
    with pytest.raises(ParameterError):
        hypothetical_process(path_graph(3), {0}, make_schedule(4, 4, 4))


@pytest.mark.parametrize("seed", range(5))
def test_hypothetical_counts_gnp40(seed):
    g = gen_gnp(40, 0.3, seed)
    opt = exact_min_vc(g)
    hyp = hypothetical_process(g, opt, make_schedule(40, 40, 1))
    assert per_iteration_counts_ok(hyp, len(opt))
    assert hypothetical_size_bound(hyp, len(opt))


@st.composite
def graph_with_cover(draw):
    g = draw(graphs(min_n=2, max_n=16))
    extra = draw(st.frozensets(st.integers(0, g.n - 1)))
    cover = set(extra) | {int(u) for u, _ in g.edges}
    return g, frozenset(cover)


@settings(max_examples=100, deadline=None)
@given(graph_with_cover(), st.sampled_from([0.5, 1.0, 2.0]))
def test_hypothetical_properties(pair, c):
    g, cover = pair
    if c * np.log2(g.n) <= 1:
        return
    sch = make_schedule(g.n, g.n, c)
    hyp = hypothetical_process(g, cover, sch)
    assert hypothetical_size_bound(hyp, len(cover))
    assert per_iteration_counts_ok(hyp, len(cover))
    assert hyp == hypothetical_process(g, cover, sch)
    mask = np.zeros(g.n, dtype=bool)
    mask[list(cover)] = True
    for i, ph in enumerate(hyp.opt_side, start=1):
        for t in range(1, len(ph) + 1):
            e = residual_after(g, hyp, i, t)
            assert np.all(mask[e[:, 0]] | mask[e[:, 1]])
            assert not np.any(mask[e[:, 0]] & mask[e[:, 1]])


def test_bipartite_residual_drops_inner_edges():
    e = bipartite_residual(complete_graph(4), {0, 1})
    assert {tuple(x) for x in e.tolist()} == {(0, 2), (0, 3), (1, 2), (1, 3), (2, 3)}


def test_sandwich_empty():
    g = Graph.empty(64)
    tr = parallel_peel(g, MpcConfig(c_scale=2))
    rep = sandwich_audit(tr, hypothetical_process(g, set(), tr.schedule))
    assert rep.holds


def test_sandwich_star():
    g = star_graph(63)
    tr = parallel_peel(g, MpcConfig(c_scale=2, seed=3))
    hyp = hypothetical_process(g, {0}, tr.schedule)
    rep = sandwich_audit(tr, hyp, "exact")
    assert rep.holds and all(rep.a_superset_o) and all(rep.b_subset_obar)
    assert 0 in rep.a_sets[0]
    assert all(not b for b in rep.b_sets)
    d = json.loads(rep.to_json())
    assert d["cover_source"] == "exact" and d["violation"] is None


def test_sandwich_reports_witness():
    g = star_graph(63)
    tr = parallel_peel(g, MpcConfig(c_scale=2, seed=3))
    hyp = hypothetical_process(g, {0}, tr.schedule)
    # drop the centre from the parallel run's first phase
    ph = tr.phases[0]
    tr.phases[0] = dataclasses.replace(ph, peeled=ph.peeled - {0},
                                       cleanup_peeled=ph.cleanup_peeled - {0})
    rep = sandwich_audit(tr, hyp)
    assert not rep.holds
    assert rep.violation == {"phase": 1, "side": "A", "witness_vertex": 0}


def test_sandwich_schedule_mismatch():
    g = star_graph(63)
    tr = parallel_peel(g, MpcConfig(c_scale=2))
    hyp = hypothetical_process(g, {0}, make_schedule(64, 64, 1))
    with pytest.raises(ParameterError):
        sandwich_audit(tr, hyp)


def test_sandwich_gnp_small_rate():
    held = 0
    for seed in range(10):
        g = gen_gnp(600, 0.02, seed)
        tr = parallel_peel(g, MpcConfig(c_scale=2, seed=seed))
        hyp = hypothetical_process(g, matching_cover(g, seed=seed), tr.schedule)
        held += sandwich_audit(tr, hyp).holds
    assert held >= 8
