"""Immutable simple undirected graphs, generators and cover predicates.

Vertices are integer ids ``0..n-1``.  Derived graphs (induced subgraphs,
residual graphs) keep the parent's universe size and carry a membership
mask instead of renumbering, so vertex sets from different machines and
phases can be intersected directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np


class ParameterError(ValueError):
    """Invalid argument to a graph, schedule or sampler operation."""


class GraphFormatError(ValueError):
    """Malformed edge-list file."""

    def __init__(self, path, lineno: int, message: str):
        super().__init__(f"{path}:{lineno}: {message}")
        self.path = path
        self.lineno = lineno


VertexSet = frozenset  # frozenset[int]; members < universe size


@dataclass(frozen=True)
class RngSeed:
    """A seed plus a stream id; equal pairs give equal random streams.

    Substreams are derived with numpy's ``SeedSequence`` spawn keys, so
    the stream for ``(phase, machine)`` does not depend on how many other
    streams were consumed before it or in which order.
    """

    seed: int
    stream: tuple = ()

    def substream(self, *keys: int) -> "RngSeed":
        return RngSeed(self.seed, self.stream + tuple(int(k) for k in keys))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed & ((1 << 64) - 1), spawn_key=self.stream)
        return np.random.default_rng(ss)


SeedLike = Union[int, RngSeed]


def as_seed(seed: SeedLike) -> RngSeed:
    if isinstance(seed, RngSeed):
        return seed
    return RngSeed(int(seed))


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple undirected graph in compressed adjacency form.

    ``edges`` holds each undirected edge once as a row ``(u, v)`` with
    ``u < v``, sorted lexicographically.  ``indptr``/``indices`` store the
    symmetric adjacency (each edge once per endpoint).  ``members`` is the
    vertex set of the graph; ``None`` means every id below ``n``.
    """

    n: int
    edges: np.ndarray
    members: Optional[np.ndarray] = None
    left_size: Optional[int] = None
    indptr: np.ndarray = field(init=False, repr=False)
    indices: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        edges.setflags(write=False)
        object.__setattr__(self, "edges", edges)
        if self.members is not None:
            mem = np.asarray(self.members, dtype=bool)
            mem.setflags(write=False)
            object.__setattr__(self, "members", mem)
        src = np.concatenate([edges[:, 0], edges[:, 1]])
        dst = np.concatenate([edges[:, 1], edges[:, 0]])
        order = np.lexsort((dst, src))
        counts = np.bincount(src, minlength=self.n)
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        indices = dst[order]
        indptr.setflags(write=False)
        indices.setflags(write=False)
        object.__setattr__(self, "indptr", indptr)
        object.__setattr__(self, "indices", indices)

    @classmethod
    def from_edges(cls, n: int, edges, members=None, left_size=None) -> "Graph":
        """Validate and normalise an edge list; rejects loops and duplicates."""
        if n < 0:
            raise ParameterError(f"vertex count must be >= 0, got {n}")
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                         dtype=np.int64).reshape(-1, 2)
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise ParameterError("edge endpoint out of range")
        if np.any(arr[:, 0] == arr[:, 1]):
            raise ParameterError("self-loops are not allowed")
        arr = np.sort(arr, axis=1)
        key = arr[:, 0] * max(n, 1) + arr[:, 1]
        if np.unique(key).size != key.size:
            raise ParameterError("duplicate edges are not allowed")
        arr = arr[np.argsort(key, kind="stable")]
        if members is not None:
            members = as_mask(members, n)
            if arr.size and not np.all(members[arr[:, 0]] & members[arr[:, 1]]):
                raise ParameterError("edge endpoint outside the member set")
        return cls(n, arr, members, left_size)

    @classmethod
    def empty(cls, n: int = 0) -> "Graph":
        return cls(n, np.empty((0, 2), dtype=np.int64))

    @property
    def m(self) -> int:
        return int(self.edges.shape[0])

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def degree(self, v: int) -> int:
        _check_vertex(self, v)
        return int(self.indptr[v + 1] - self.indptr[v])

    def neighbors(self, v: int) -> np.ndarray:
        _check_vertex(self, v)
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def vertex_mask(self) -> np.ndarray:
        if self.members is None:
            return np.ones(self.n, dtype=bool)
        return self.members.copy()

    def vertex_count(self) -> int:
        return self.n if self.members is None else int(self.members.sum())

    def edge_set(self) -> set:
        return {(int(u), int(v)) for u, v in self.edges}

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.n == other.n
                and np.array_equal(self.edges, other.edges)
                and np.array_equal(self.vertex_mask(), other.vertex_mask()))

    def __hash__(self):
        return hash((self.n, self.edges.tobytes()))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


def _check_vertex(g: Graph, v: int) -> None:
    if not 0 <= v < g.n:
        raise ParameterError(f"vertex {v} out of range for n={g.n}")


def as_mask(vs, n: int) -> np.ndarray:
    """Boolean membership mask of length ``n`` for a vertex collection."""
    if isinstance(vs, np.ndarray) and vs.dtype == bool:
        if vs.shape != (n,):
            raise ParameterError(f"mask has shape {vs.shape}, expected ({n},)")
        return vs
    ids = np.fromiter((int(v) for v in vs), dtype=np.int64) if not isinstance(vs, np.ndarray) \
        else vs.astype(np.int64, copy=False)
    if ids.size and (ids.min() < 0 or ids.max() >= n):
        raise ParameterError(f"vertex id out of range for universe size {n}")
    mask = np.zeros(n, dtype=bool)
    mask[ids] = True
    return mask


def mask_to_set(mask: np.ndarray) -> frozenset:
    return frozenset(int(v) for v in np.flatnonzero(mask))


def _check_probability(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"probability must lie in [0, 1], got {p}")


def _triangular_pairs(k: np.ndarray, n: int) -> np.ndarray:
    """Map row-major indices of the strict upper triangle to (i, j) pairs."""
    k = k.astype(np.int64)
    b = 2 * n - 1
    i = np.floor((b - np.sqrt(np.maximum(b * b - 8.0 * k, 0.0))) / 2).astype(np.int64)
    row_start = lambda r: r * n - r * (r + 1) // 2
    # floating point may land one row off in either direction
    i = np.where(row_start(i) > k, i - 1, i)
    i = np.where(row_start(i + 1) <= k, i + 1, i)
    j = k - row_start(i) + i + 1
    return np.stack([i, j], axis=1)


def gen_gnp(n: int, p: float, seed: SeedLike) -> Graph:
    """Erdős–Rényi G(n, p): every pair is an edge independently w.p. ``p``.

    The edge count is drawn from Binomial(C(n,2), p) and the edge positions
    uniformly without replacement, which yields exactly the G(n, p) law.
    """
    if n < 0:
        raise ParameterError(f"n must be >= 0, got {n}")
    _check_probability(p)
    total = n * (n - 1) // 2
    if total == 0 or p == 0.0:
        return Graph.empty(n)
    rng = as_seed(seed).generator()
    m = int(rng.binomial(total, p))
    idx = np.sort(rng.choice(total, size=m, replace=False))
    return Graph(n, _triangular_pairs(idx, n))


def gen_bipartite_gnp(n_left: int, n_right: int, p: float, seed: SeedLike) -> Graph:
    """Random bipartite graph: left ids ``0..nL-1``, right ids ``nL..nL+nR-1``."""
    if n_left < 0 or n_right < 0:
        raise ParameterError("side sizes must be >= 0")
    _check_probability(p)
    n = n_left + n_right
    total = n_left * n_right
    if total == 0 or p == 0.0:
        return Graph(n, np.empty((0, 2), dtype=np.int64), left_size=n_left)
    rng = as_seed(seed).generator()
    m = int(rng.binomial(total, p))
    idx = np.sort(rng.choice(total, size=m, replace=False))
    edges = np.stack([idx // n_right, n_left + idx % n_right], axis=1)
    return Graph(n, edges, left_size=n_left)


def induced_subgraph(g: Graph, vs) -> Graph:
    """Subgraph on ``vs`` with every edge of ``g`` inside it; ids are kept."""
    mask = as_mask(vs, g.n)
    if g.members is not None:
        mask = mask & g.members
    e = g.edges
    keep = mask[e[:, 0]] & mask[e[:, 1]]
    return Graph(g.n, e[keep], mask, g.left_size)


def alive_degrees(g: Graph, alive: np.ndarray) -> np.ndarray:
    """Degree of every vertex within the subgraph induced by ``alive``."""
    e = g.edges
    keep = alive[e[:, 0]] & alive[e[:, 1]]
    e = e[keep]
    return (np.bincount(e[:, 0], minlength=g.n) + np.bincount(e[:, 1], minlength=g.n))


def degree_to(g: Graph, v: int, s) -> int:
    """|N(v) ∩ s|."""
    _check_vertex(g, v)
    mask = as_mask(s, g.n)
    return int(mask[g.neighbors(v)].sum())


def is_vertex_cover(g: Graph, c) -> bool:
    mask = as_mask(c, g.n)
    e = g.edges
    return bool(np.all(mask[e[:, 0]] | mask[e[:, 1]]))


def uncovered_edges(g: Graph, c) -> np.ndarray:
    mask = as_mask(c, g.n)
    e = g.edges
    return e[~(mask[e[:, 0]] | mask[e[:, 1]])]


# -- fixtures used throughout tests and the CLI ---------------------------

def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def cycle_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def star_graph(leaves: int) -> Graph:
    """K_{1,leaves} with centre 0."""
    return Graph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def petersen_graph() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return Graph.from_edges(10, outer + spokes + inner)


# -- edge-list files --------------------------------------------------------

def read_edge_list(path) -> Graph:
    """Parse ``"n m"`` followed by ``m`` lines ``"u v"`` with ``u < v``."""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise GraphFormatError(path, 0, str(exc)) from exc
    body = [(i + 1, ln.split()) for i, ln in enumerate(lines) if ln.strip()]
    if not body:
        raise GraphFormatError(path, 1, "missing header 'n m'")
    lineno, head = body[0]
    if len(head) != 2:
        raise GraphFormatError(path, lineno, "header must be 'n m'")
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError:
        raise GraphFormatError(path, lineno, "header must contain two integers") from None
    if len(body) - 1 != m:
        raise GraphFormatError(path, body[-1][0], f"expected {m} edges, found {len(body) - 1}")
    edges = []
    seen = set()
    for lineno, parts in body[1:]:
        if len(parts) != 2:
            raise GraphFormatError(path, lineno, "edge line must be 'u v'")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(path, lineno, "edge endpoints must be integers") from None
        if not (0 <= u < v < n):
            raise GraphFormatError(path, lineno, f"need 0 <= u < v < {n}, got {u} {v}")
        if (u, v) in seen:
            raise GraphFormatError(path, lineno, f"duplicate edge {u} {v}")
        seen.add((u, v))
        edges.append((u, v))
    return Graph.from_edges(n, edges)


def write_edge_list(g: Graph, path) -> None:
    lines = [f"{g.n} {g.m}"] + [f"{u} {v}" for u, v in g.edges]
    Path(path).write_text("\n".join(lines) + "\n")
