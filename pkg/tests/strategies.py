"""Hypothesis strategies shared across the suite."""

import itertools

import hypothesis.strategies as st

from mpcvc.graph import Graph


@st.composite
def graphs(draw, min_n=0, max_n=12):
    n = draw(st.integers(min_n, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return Graph.from_edges(n, chosen)


@st.composite
def graph_and_subset(draw, min_n=0, max_n=12):
    g = draw(graphs(min_n, max_n))
    vs = draw(st.frozensets(st.integers(0, g.n - 1))) if g.n else frozenset()
    return g, vs
