"""Degree-threshold schedules and the two peeling procedures.

``sequential_peel`` is the Parnas–Ron process (thresholds n/2, n/4, ...,
1).  ``local_peel`` is the per-machine subroutine run inside each phase of
the parallel algorithm.  Both peel *simultaneously*: the set removed in an
iteration is decided from the degrees at the start of that iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .graph import Graph, ParameterError, as_mask, mask_to_set

DEFAULT_C_SCALE = 4.0

# Guards ceil() against 64.00000000001 style float noise in n ** (1/2**k).
_CEIL_EPS = 1e-9


@dataclass(frozen=True)
class PhaseSchedule:
    """Thresholds Δ_1..Δ_τ and the per-phase sampling parameters.

    ``tau`` counts thresholds.  Phase ``i`` (1-based) runs from ``Δ_i`` down
    to ``Δ_{i+1}``, so there are ``tau - 1`` sampled phases; the graph left
    after the last one has maximum degree at most ``Δ_τ`` and is handed to
    the final phase.  ``probabilities``, ``machine_counts``,
    ``local_thresholds`` and ``iterations`` all have one entry per phase.
    """

    n: int
    s: int
    c_scale: float
    thresholds: tuple
    probabilities: tuple
    machine_counts: tuple
    local_thresholds: tuple
    iterations: tuple
    degenerate: bool

    @property
    def tau(self) -> int:
        return len(self.thresholds)

    @property
    def num_phases(self) -> int:
        return len(self.probabilities)

    @property
    def log_n(self) -> float:
        return math.log2(self.n)

    @property
    def floor_threshold(self) -> float:
        return self.thresholds[-1]

    @property
    def sublinear(self) -> bool:
        return self.s < self.n


@dataclass(frozen=True)
class PeelTrace:
    """Per-iteration peel sets of one ``local_peel`` run."""

    peeled_per_iteration: tuple
    thresholds: tuple
    t_max: int

    @property
    def peeled(self) -> frozenset:
        return frozenset().union(*self.peeled_per_iteration)


@dataclass(frozen=True)
class CoverResult:
    """A vertex cover with the (phase, origin) that contributed each vertex."""

    cover: frozenset
    provenance: dict = field(default_factory=dict, compare=False)

    @property
    def size(self) -> int:
        return len(self.cover)


def iteration_count(delta: float, floor: float) -> int:
    """Smallest integer t >= 0 with ``delta / 2**t <= floor``."""
    if floor <= 0:
        raise ParameterError(f"floor threshold must be positive, got {floor}")
    t = 0
    while delta / 2 ** t > floor:
        t += 1
    return t


def make_schedule(n: int, s: int, c_scale: float = DEFAULT_C_SCALE) -> PhaseSchedule:
    """Build the threshold schedule for ``n`` vertices and memory ``s``.

    Δ_i = ceil(n / s^(1 - 1/2^(i-1))), which is n^(1/2^(i-1)) when s = n.
    The sequence stops at the first index whose formula value is at most
    ``c_scale * (n/s) * log2 n`` and that last entry is replaced by the
    floor value itself.
    """
    if n < 2:
        raise ParameterError(f"n must be >= 2, got {n}")
    if s < 2 or s > n:
        raise ParameterError(f"need 2 <= s <= n, got s={s}, n={n}")
    if c_scale <= 0:
        raise ParameterError(f"c_scale must be positive, got {c_scale}")
    log_n = math.log2(n)
    if c_scale * log_n <= 1:
        raise ParameterError("c_scale * log2(n) must exceed 1 for the schedule to terminate")
    floor_val = c_scale * (n / s) * log_n

    thresholds = []
    i = 1
    while True:
        val = n / s ** (1 - 1 / 2 ** (i - 1))
        if val <= floor_val:
            thresholds.append(floor_val)
            break
        thresholds.append(float(math.ceil(val - _CEIL_EPS)))
        i += 1

    probs, machines, local, iters = [], [], [], []
    degenerate = len(thresholds) == 1
    for d_i, d_next in zip(thresholds, thresholds[1:]):
        raw = c_scale * log_n / d_next
        if raw > 1:
            degenerate = True
        p = min(1.0, raw)
        delta = p * d_i
        probs.append(p)
        machines.append(int(math.ceil(d_next - _CEIL_EPS)))
        local.append(delta)
        iters.append(iteration_count(delta, c_scale * log_n))
    return PhaseSchedule(n, s, float(c_scale), tuple(thresholds), tuple(probs),
                         tuple(machines), tuple(local), tuple(iters), degenerate)


def peel_edges(edges: np.ndarray, n: int, thresholds) -> list:
    """Run simultaneous threshold peeling on an edge array.

    Returns one sorted id array per threshold.  Only vertices with at least
    one remaining edge can be peeled, so a non-positive threshold never
    peels isolated vertices.
    """
    out = []
    e = edges
    deg = None
    for thr in thresholds:
        if e.shape[0] == 0:
            out.append(np.empty(0, dtype=np.int64))
            continue
        if deg is None:
            deg = np.bincount(e[:, 0], minlength=n) + np.bincount(e[:, 1], minlength=n)
        hit = (deg >= thr) & (deg > 0)
        ids = np.flatnonzero(hit)
        out.append(ids)
        if ids.size:
            e = e[~(hit[e[:, 0]] | hit[e[:, 1]])]
            deg = None
    return out


def _alive_edges(g: Graph, alive: Optional[np.ndarray]) -> np.ndarray:
    e = g.edges
    if alive is None:
        return e
    return e[alive[e[:, 0]] & alive[e[:, 1]]]


def sequential_thresholds(top: float) -> list:
    """top/2, top/4, ... ending with the first value <= 1."""
    out = []
    t = 1
    while True:
        thr = top / 2 ** t
        out.append(thr)
        if thr <= 1:
            return out
        t += 1


def sequential_peel(g: Graph) -> CoverResult:
    """Parnas–Ron peeling with thresholds n/2, n/4, ... down to 1.

    The final threshold is <= 1, at which point every endpoint of a
    surviving edge is peeled, so the result always covers ``g``.
    """
    if g.m == 0:
        return CoverResult(frozenset(), {})
    alive = None if g.members is None else g.members
    peels = peel_edges(_alive_edges(g, alive), g.n, sequential_thresholds(g.n))
    provenance = {}
    for t, ids in enumerate(peels, start=1):
        for v in ids:
            provenance[int(v)] = (t, "sequential")
    cover = frozenset(provenance)
    e = g.edges
    mask = as_mask(cover, g.n)
    assert np.all(mask[e[:, 0]] | mask[e[:, 1]]), "sequential peeling left an edge uncovered"
    return CoverResult(cover, provenance)


def local_thresholds(delta: float, floor: float) -> list:
    """Iteration thresholds delta/2^(t+1) for t = 1..t_max."""
    t_max = iteration_count(delta, floor)
    return [delta / 2 ** (t + 1) for t in range(1, t_max + 1)]


def local_peel(g: Graph, alive, delta: float, c_scale: float = DEFAULT_C_SCALE) -> PeelTrace:
    """Local-Peeling on the subgraph of ``g`` induced by ``alive``.

    ``t_max`` is the smallest t with ``delta / 2**t <= c_scale * log2(n)``
    where ``n`` is the universe size of ``g``.  Iteration t peels every
    vertex whose degree among the still-present vertices is at least
    ``delta / 2**(t+1)``.
    """
    if delta <= 0:
        raise ParameterError(f"delta must be positive, got {delta}")
    if g.n < 2:
        return PeelTrace((), (), 0)
    mask = as_mask(alive, g.n) if alive is not None else g.vertex_mask()
    if g.members is not None:
        mask = mask & g.members
    thresholds = local_thresholds(delta, c_scale * math.log2(g.n))
    peels = peel_edges(_alive_edges(g, mask), g.n, thresholds)
    return PeelTrace(tuple(frozenset(int(v) for v in ids) for ids in peels),
                     tuple(thresholds), len(thresholds))


def replay_local_peel(g: Graph, alive, trace: PeelTrace) -> bool:
    """Check every peeled vertex met its iteration threshold when peeled."""
    mask = as_mask(alive, g.n).copy() if alive is not None else g.vertex_mask()
    seen = set()
    for peeled, thr in zip(trace.peeled_per_iteration, trace.thresholds):
        if seen & peeled:
            return False
        e = _alive_edges(g, mask)
        deg = np.bincount(e[:, 0], minlength=g.n) + np.bincount(e[:, 1], minlength=g.n)
        expected = mask_to_set((deg >= thr) & (deg > 0))
        if expected != peeled:
            return False
        mask[list(peeled)] = False
        seen |= peeled
    return True
