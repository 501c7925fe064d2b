import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from mpcvc.graph import (Graph, GraphFormatError, ParameterError, RngSeed, complete_graph,
                         cycle_graph, degree_to, gen_bipartite_gnp, gen_gnp, induced_subgraph,
                         is_vertex_cover, path_graph, petersen_graph, read_edge_list, star_graph,
                         uncovered_edges, write_edge_list)
from strategies import graph_and_subset, graphs


def test_gnp_extremes():
    assert gen_gnp(4, 0.0, 1).m == 0
    k4 = gen_gnp(4, 1.0, 1)
    assert k4.m == 6 and k4 == complete_graph(4)


def test_gnp_edge_count_band():
    # E[m] = C(1000, 2) * 0.01 = 4995
    assert 4455 <= gen_gnp(1000, 0.01, 7).m <= 5445


def test_gnp_edge_count_mean_over_seeds():
    counts = [gen_gnp(200, 0.1, sd).m for sd in range(40)]
    assert abs(np.mean(counts) - 1990) < 3 * np.sqrt(1990 * 0.9 / 40)


def test_gnp_rejects_bad_probability():
    with pytest.raises(ParameterError):
        gen_gnp(5, 1.5, 0)
    with pytest.raises(ParameterError):
        gen_gnp(-1, 0.5, 0)


def test_bipartite_extremes():
    k33 = gen_bipartite_gnp(3, 3, 1.0, 0)
    assert k33.m == 9 and k33.left_size == 3
    assert gen_bipartite_gnp(2, 2, 0.0, 0).m == 0


def test_bipartite_edge_count_band():
    g = gen_bipartite_gnp(10_000, 10_000, 1e-4, 3)
    assert 9700 <= g.m <= 10300


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 40), st.integers(1, 40), st.floats(0, 1), st.integers(0, 2**32))
def test_bipartite_edges_cross_sides(nl, nr, p, seed):
    g = gen_bipartite_gnp(nl, nr, p, seed)
    assert np.all(g.edges[:, 0] < nl) and np.all(g.edges[:, 1] >= nl)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 60), st.floats(0, 1), st.integers(0, 2**32))
def test_gnp_reproducible(n, p, seed):
    a, b = gen_gnp(n, p, seed), gen_gnp(n, p, seed)
    assert np.array_equal(a.edges, b.edges)


def test_seed_substreams_differ():
    s = RngSeed(5)
    x = s.substream(1, 2).generator().random(4)
    y = s.substream(2, 1).generator().random(4)
    assert not np.allclose(x, y)
    assert np.array_equal(x, RngSeed(5).substream(1, 2).generator().random(4))


def test_induced_subgraph_examples():
    sub = induced_subgraph(complete_graph(4), {0, 1})
    assert sub.edge_set() == {(0, 1)}
    assert induced_subgraph(petersen_graph(), set()).m == 0
    assert induced_subgraph(path_graph(4), {0, 2, 3}).edge_set() == {(2, 3)}


def test_induced_subgraph_keeps_members():
    sub = induced_subgraph(path_graph(4), {0, 2, 3})
    assert sub.vertex_count() == 3 and sub.n == 4


def test_degree_to_examples():
    star = star_graph(5)
    assert degree_to(star, 0, set(range(1, 6))) == 5
    assert degree_to(star, 0, set()) == 0
    assert degree_to(cycle_graph(5), 0, {1, 2, 3}) == 1


def test_is_vertex_cover_examples():
    assert is_vertex_cover(star_graph(5), {0})
    assert not is_vertex_cover(path_graph(2), set())
    assert is_vertex_cover(cycle_graph(4), {0, 2})
    assert uncovered_edges(path_graph(2), set()).tolist() == [[0, 1]]


@given(graphs())
def test_all_vertices_cover(g):
    assert is_vertex_cover(g, range(g.n))


@given(graphs())
def test_full_induced_subgraph_is_identity(g):
    assert induced_subgraph(g, range(g.n)).edge_set() == g.edge_set()


@given(graphs(min_n=1))
def test_degree_to_everything_is_degree(g):
    for v in range(g.n):
        assert degree_to(g, v, range(g.n)) == g.degree(v)


@given(graph_and_subset())
def test_induced_subgraph_edges_inside(pair):
    g, vs = pair
    sub = induced_subgraph(g, vs)
    assert sub.edge_set() == {(u, v) for u, v in g.edge_set() if u in vs and v in vs}


def test_from_edges_validation():
    with pytest.raises(ParameterError):
        Graph.from_edges(3, [(0, 0)])
    with pytest.raises(ParameterError):
        Graph.from_edges(3, [(0, 1), (1, 0)])
    with pytest.raises(ParameterError):
        Graph.from_edges(3, [(0, 3)])


def test_csr_neighbors():
    g = star_graph(3)
    assert sorted(g.neighbors(0).tolist()) == [1, 2, 3]
    assert g.neighbors(2).tolist() == [0]
    assert g.degrees.tolist() == [3, 1, 1, 1]


@settings(max_examples=25, deadline=None)
@given(graphs())
def test_edge_list_round_trip(tmp_path_factory, g):
    path = tmp_path_factory.mktemp("io") / "g.txt"
    write_edge_list(g, path)
    assert read_edge_list(path) == g


@pytest.mark.parametrize("text, line", [
    ("3 1\n0 x\n", 2),
    ("3 2\n0 1\n", 2),
    ("3 1\n2 1\n", 2),
    ("3 2\n0 1\n0 1\n", 3),
    ("3\n", 1),
    ("", 1),
])
def test_edge_list_errors_carry_line(tmp_path, text, line):
    path = tmp_path / "bad.txt"
    path.write_text(text)
    with pytest.raises(GraphFormatError) as err:
        read_edge_list(path)
    assert err.value.lineno == line
