"""Balls into bins, induced matchings in G(n, n, 1/n), and tail bounds.

The two probability bounds are the Hoeffding-type Chernoff bound for sums
of independent [0, 1] variables and the bounded-differences inequality;
``empirical_tail`` measures the matching frequencies by Monte Carlo.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np

from .graph import Graph, ParameterError, SeedLike, as_mask, as_seed, mask_to_set


class InvariantError(AssertionError):
    """An internal construction produced an object violating its contract."""


# -- balls into bins ----------------------------------------------------------

@dataclass(frozen=True)
class BallsBinsResult:
    N: int
    M: int
    B: frozenset
    singleton_count_in_B: int


def throw_balls(N: int, M: int, B, seed: SeedLike) -> BallsBinsResult:
    """Throw ``N`` balls into ``M > N`` bins; count singleton bins inside ``B``."""
    if not (M > N >= 1):
        raise ParameterError(f"need M > N >= 1, got N={N}, M={M}")
    b_mask = as_mask(B, M)
    rng = as_seed(seed).generator()
    counts = np.bincount(rng.integers(0, M, N), minlength=M)
    return BallsBinsResult(N, M, mask_to_set(b_mask), int(((counts == 1) & b_mask).sum()))


def expected_singletons(N: int, M: int, b_size: int) -> float:
    """E[#bins of B with exactly one ball] = |B| (N/M) (1 - 1/M)^(N-1)."""
    return b_size * (N / M) * (1 - 1 / M) ** (N - 1)


def singleton_counts(N: int, M: int, b_size: int, trials: int, rng: np.random.Generator,
                     chunk: int = 500) -> np.ndarray:
    """Vectorised ``trials`` repetitions of the singleton statistic.

    B is taken to be the first ``b_size`` bins; by symmetry only its size
    matters for the distribution.
    """
    out = np.empty(trials, dtype=np.int64)
    done = 0
    while done < trials:
        c = min(chunk, trials - done)
        bins = rng.integers(0, M, size=(c, N))
        flat = (bins + (np.arange(c) * M)[:, None]).ravel()
        counts = np.bincount(flat, minlength=c * M).reshape(c, M)
        out[done:done + c] = (counts[:, :b_size] == 1).sum(axis=1)
        done += c
    return out


def deviation_4sqrt(N: int) -> float:
    """4 sqrt(N ln N), the concrete stand-in for the o(N) error terms."""
    return 4 * math.sqrt(N * math.log(N)) if N > 1 else 0.0


# -- induced matchings --------------------------------------------------------

@dataclass(frozen=True)
class InducedMatchingResult:
    S: frozenset
    T: frozenset
    T_prime: frozenset
    S_prime: frozenset
    matching: tuple

    @property
    def size(self) -> int:
        return len(self.matching)


def verify_induced_matching(g: Graph, matching) -> bool:
    """Matched edges are disjoint, present in ``g``, and no edge of ``g``
    joins vertices of two different matched pairs."""
    pair = np.full(g.n, -1, dtype=np.int64)
    edges = g.edge_set()
    for idx, (u, v) in enumerate(matching):
        u, v = int(u), int(v)
        if (min(u, v), max(u, v)) not in edges:
            return False
        if pair[u] >= 0 or pair[v] >= 0:
            return False
        pair[u] = pair[v] = idx
    e = g.edges
    pu, pv = pair[e[:, 0]], pair[e[:, 1]]
    return not bool(np.any((pu >= 0) & (pv >= 0) & (pu != pv)))


def _sides(g: Graph, n_left: Optional[int]) -> int:
    n_left = g.left_size if n_left is None else n_left
    if n_left is None:
        raise ParameterError("graph has no declared left side")
    e = g.edges
    if e.shape[0] and not np.all((e[:, 0] < n_left) & (e[:, 1] >= n_left)):
        raise ParameterError("graph is not bipartite between the declared sides")
    return n_left


def extract_induced_matching(g: Graph, n_left: Optional[int] = None) -> InducedMatchingResult:
    """Build the S' - T' induced matching of a random bipartite graph.

    S: left vertices of degree one.  T: right vertices with no neighbour in
    L minus S.  T': members of T receiving exactly one edge (necessarily
    from S).  Each T' vertex is paired with its unique neighbour.
    """
    n_left = _sides(g, n_left)
    deg = g.degrees
    left = np.zeros(g.n, dtype=bool)
    left[:n_left] = True
    s_mask = left & (deg == 1)
    e = g.edges
    blocked = np.zeros(g.n, dtype=bool)
    blocked[e[~s_mask[e[:, 0]], 1]] = True
    t_mask = ~left & ~blocked
    tp_mask = t_mask & (deg == 1)
    tp = np.flatnonzero(tp_mask)
    partners = g.indices[g.indptr[tp]]
    matching = tuple(sorted((int(u), int(v)) for u, v in zip(partners, tp)))
    result = InducedMatchingResult(mask_to_set(s_mask), mask_to_set(t_mask), mask_to_set(tp_mask),
                                   frozenset(int(u) for u in partners), matching)
    if not verify_induced_matching(g, matching):
        raise InvariantError("extracted matching is not induced")
    return result


def resample_singleton_edges(g: Graph, seed: SeedLike, n_left: Optional[int] = None) -> Graph:
    """Keep edges from non-degree-one left vertices, redraw the rest.

    Every degree-one left vertex gets a fresh uniform neighbour on the
    right.  Under G(n, n, p) this should leave the law of the extracted
    matching unchanged; tests compare the two samplers statistically.
    """
    n_left = _sides(g, n_left)
    n_right = g.n - n_left
    deg = g.degrees
    e = g.edges
    from_s = deg[e[:, 0]] == 1
    s_verts = np.flatnonzero(deg[:n_left] == 1)
    rng = as_seed(seed).generator()
    fresh = np.stack([s_verts, n_left + rng.integers(0, n_right, s_verts.size)], axis=1)
    return Graph.from_edges(g.n, np.concatenate([e[~from_s], fresh]), left_size=n_left)


# -- tail bounds --------------------------------------------------------------

def chernoff_bound(n: int, t: float) -> float:
    """min(1, 2 exp(-2 t^2 / n))."""
    if n < 1 or t < 0:
        raise ParameterError("need n >= 1 and t >= 0")
    return min(1.0, 2 * math.exp(-2 * t * t / n))


def bounded_differences_bound(n: int, d: float, t: float) -> float:
    """min(1, 2 exp(-2 t^2 / (n d^2)))."""
    if n < 1 or d <= 0 or t < 0:
        raise ParameterError("need n >= 1, d > 0 and t >= 0")
    return min(1.0, 2 * math.exp(-2 * t * t / (n * d * d)))


Sampler = Callable[[np.random.Generator, int], np.ndarray]


def empirical_tail(sampler: Sampler, trials: int, t: float, seed: SeedLike,
                   mean: Optional[float] = None) -> float:
    """Fraction of ``trials`` samples with |X - mean| > t.

    ``sampler(rng, k)`` returns ``k`` independent samples.  Without a
    closed-form ``mean`` the mean is estimated from a separate block of
    samples drawn from an independent substream.
    """
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    seed = as_seed(seed)
    if mean is None:
        mean = float(np.mean(sampler(seed.substream(1).generator(), trials)))
    x = np.asarray(sampler(seed.substream(0).generator(), trials), dtype=float)
    return float(np.mean(np.abs(x - mean) > t))


def bernoulli_sum(n: int, q: float = 0.5) -> Sampler:
    return lambda rng, k: rng.binomial(n, q, size=k)


def uniform_sum(n: int) -> Sampler:
    def sample(rng, k):
        out = np.empty(k)
        for i in range(0, k, 1000):
            out[i:i + 1000] = rng.random((min(1000, k - i), n)).sum(axis=1)
        return out
    return sample


def singleton_statistic(N: int, M: int, b_size: int) -> Sampler:
    return lambda rng, k: singleton_counts(N, M, b_size, k, rng)


@dataclass
class StatReport:
    experiment: str
    params: dict
    trials: int
    observed: float
    bound: float
    passed: bool

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


# (n, t) points; t chosen so every bound is below 1 and the test has teeth
CHERNOFF_POINTS = ((100, 10.0), (400, 25.0), (1000, 40.0))
BALLS_POINTS = ((1000, 2000, 2000, 70.0), (1000, 2000, 1000, 60.0), (500, 5000, 5000, 45.0))


def concentration_suite(trials: int = 10_000, seed: SeedLike = 0) -> list:
    """Empirical tails against both bounds at fixed parameter points."""
    seed = as_seed(seed)
    reports = []
    for k, (n, t) in enumerate(CHERNOFF_POINTS):
        bound = chernoff_bound(n, t)
        freq = empirical_tail(bernoulli_sum(n), trials, t, seed.substream(1, k), mean=n / 2)
        reports.append(StatReport("chernoff/bernoulli", {"n": n, "t": t}, trials, freq, bound,
                                  freq <= bound))
        freq = empirical_tail(uniform_sum(n), trials, t, seed.substream(2, k), mean=n / 2)
        reports.append(StatReport("chernoff/uniform", {"n": n, "t": t}, trials, freq, bound,
                                  freq <= bound))
    for k, (N, M, b, t) in enumerate(BALLS_POINTS):
        bound = bounded_differences_bound(N, 2, t)
        freq = empirical_tail(singleton_statistic(N, M, b), trials, t, seed.substream(3, k),
                              mean=expected_singletons(N, M, b))
        reports.append(StatReport("bounded-differences/singletons",
                                  {"N": N, "M": M, "B": b, "d": 2, "t": t}, trials, freq, bound,
                                  freq <= bound))
    return reports
