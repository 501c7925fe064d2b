import math

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from mpcvc.graph import (Graph, ParameterError, gen_gnp, is_vertex_cover, star_graph)
from mpcvc.oracle import exact_min_vc
from mpcvc.peeling import (iteration_count, local_peel, local_thresholds, make_schedule,
                           replay_local_peel, sequential_peel, sequential_thresholds)
from strategies import graph_and_subset, graphs


def test_schedule_linear_65536():
    sch = make_schedule(65536, 65536, 4)
    # 4 * log2(65536) = 64 and 65536^(1/4) = 16 <= 64
    assert sch.thresholds == (65536, 256, 64)
    assert sch.tau == 3
    assert sch.probabilities == (0.25, 1.0)
    assert sch.machine_counts == (256, 64)
    assert sch.iterations == (8, 2)


def test_schedule_degenerate_tiny():
    sch = make_schedule(4, 4, 4)
    assert sch.tau == 1 and sch.num_phases == 0 and sch.degenerate
    assert sch.thresholds == (8.0,)


@pytest.mark.parametrize("n, s, c, thresholds", [
    (4096, 4096, 4, (4096, 64, 48)),
    (2048, 2048, 2, (2048, 46, 22)),
    (4096, 512, 4, (4096, 384)),
    (4096, 64, 4, (4096, 3072)),
])
def test_schedule_frozen_values(n, s, c, thresholds):
    sch = make_schedule(n, s, c)
    assert sch.thresholds == pytest.approx(thresholds)


def test_schedule_independent_recomputation():
    # recompute from the closed form with plain integer arithmetic
    n, s, c = 2**20, 2**15, 3
    floor = c * (n / s) * 20
    vals = []
    i = 1
    while True:
        v = n / s ** (1 - 1 / 2 ** (i - 1))
        if v <= floor:
            vals.append(floor)
            break
        vals.append(math.ceil(v - 1e-9))
        i += 1
    sch = make_schedule(n, s, c)
    assert sch.thresholds == pytest.approx(tuple(vals))
    for p, d_next in zip(sch.probabilities, sch.thresholds[1:]):
        assert p == pytest.approx(min(1.0, c * 20 / d_next))


@settings(max_examples=60)
@given(st.integers(4, 10**7), st.data(), st.floats(0.6, 8))
def test_schedule_shape(n, data, c):
    s = data.draw(st.integers(2, n))
    if c * math.log2(n) <= 1:
        return
    sch = make_schedule(n, s, c)
    th = sch.thresholds
    assert all(a > b for a, b in zip(th, th[1:]))
    assert th[-1] == pytest.approx(c * (n / s) * math.log2(n))
    assert len(sch.probabilities) == sch.tau - 1
    assert all(0 < p <= 1 for p in sch.probabilities)


@pytest.mark.parametrize("n, s, c", [(1, 1, 4), (10, 1, 4), (10, 11, 4), (10, 10, 0), (4, 4, 0.4)])
def test_schedule_rejects(n, s, c):
    with pytest.raises(ParameterError):
        make_schedule(n, s, c)


def test_iteration_count():
    assert iteration_count(64, 64) == 0
    assert iteration_count(64, 21.4) == 2
    assert iteration_count(65, 8) == 4
    with pytest.raises(ParameterError):
        iteration_count(10, 0)


def test_sequential_thresholds_end_at_one():
    assert sequential_thresholds(16) == [8, 4, 2, 1]
    assert sequential_thresholds(5)[-1] <= 1


def test_sequential_empty():
    assert sequential_peel(Graph.empty(5)).cover == frozenset()


def test_sequential_star():
    res = sequential_peel(star_graph(15))
    assert res.cover == {0}
    assert res.provenance[0] == (1, "sequential")


def test_sequential_ratio_gnp50():
    g = gen_gnp(50, 0.3, 1)
    res = sequential_peel(g)
    opt = len(exact_min_vc(g))
    assert is_vertex_cover(g, res.cover)
    assert res.size <= 2 * math.log2(50) * opt


@given(graphs(max_n=16))
def test_sequential_always_covers(g):
    assert is_vertex_cover(g, sequential_peel(g).cover)


@given(graphs(max_n=12), st.data())
def test_first_round_monotone_in_edges(g, data):
    extra = data.draw(st.lists(st.tuples(st.integers(0, max(g.n - 1, 0)),
                                         st.integers(0, max(g.n - 1, 0)))))
    more = g.edge_set() | {(min(u, v), max(u, v)) for u, v in extra if u != v}
    h = Graph.from_edges(g.n, sorted(more))
    first = [v for v in range(g.n) if g.degree(v) >= g.n / 2 and g.degree(v) > 0]
    first_h = {v for v in range(h.n) if h.degree(v) >= h.n / 2 and h.degree(v) > 0}
    assert set(first) <= first_h
    prov_g = {v for v, (t, _) in sequential_peel(g).provenance.items() if t == 1}
    prov_h = {v for v, (t, _) in sequential_peel(h).provenance.items() if t == 1}
    assert prov_g == set(first) and prov_h == first_h and prov_g <= prov_h


def test_local_peel_empty():
    tr = local_peel(Graph.empty(10), None, 64)
    assert all(not p for p in tr.peeled_per_iteration)


def test_local_peel_star():
    g = star_graph(40)
    tr = local_peel(g, None, 64, c_scale=4)
    # floor 4 log2 41 ~ 21.4 -> thresholds 16, 8
    assert tr.thresholds == (16, 8)
    assert tr.peeled_per_iteration == (frozenset({0}), frozenset())


def test_local_peel_two_stars():
    edges = [(0, i) for i in range(1, 21)] + [(21, i) for i in range(22, 42)]
    tr = local_peel(Graph.from_edges(42, edges), None, 64, c_scale=4)
    assert tr.peeled_per_iteration[0] == {0, 21}


def test_local_thresholds_halve():
    assert local_thresholds(64, 12) == [16, 8, 4]


def test_local_peel_rejects_bad_delta():
    with pytest.raises(ParameterError):
        local_peel(star_graph(3), None, 0)


@settings(max_examples=80)
@given(graph_and_subset(min_n=2, max_n=14), st.floats(1, 64), st.floats(0.5, 4))
def test_local_peel_replayable(pair, delta, c):
    g, alive = pair
    tr = local_peel(g, alive, delta, c)
    sets = tr.peeled_per_iteration
    assert all(not (a & b) for i, a in enumerate(sets) for b in sets[i + 1:])
    assert tr.peeled <= alive
    assert replay_local_peel(g, alive, tr)


@settings(max_examples=60)
@given(graphs(min_n=2, max_n=14), st.floats(1, 40), st.randoms(use_true_random=False))
def test_local_peel_permutation_equivariant(g, delta, rnd):
    perm = list(range(g.n))
    rnd.shuffle(perm)
    h = Graph.from_edges(g.n, [(perm[u], perm[v]) for u, v in g.edges.tolist()])
    a = local_peel(g, None, delta, 1.0)
    b = local_peel(h, None, delta, 1.0)
    assert b.peeled_per_iteration == tuple(frozenset(perm[v] for v in s)
                                           for s in a.peeled_per_iteration)


def test_replay_catches_tampering():
    g = star_graph(40)
    tr = local_peel(g, None, 64)
    bad = type(tr)((frozenset({1}),) + tr.peeled_per_iteration[1:], tr.thresholds, tr.t_max)
    assert not replay_local_peel(g, None, bad)
