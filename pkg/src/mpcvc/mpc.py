"""Single-process simulation of the MPC model running Parallel-Peeling.

Machines are materialised lazily, one induced subgraph at a time, and each
is charged the vertices and edges it would hold.  Every phase costs
``ROUNDS_PER_PHASE`` rounds (distribute, compute locally, collect); every
iteration of an iterated final phase costs ``ROUNDS_PER_FINAL_ITERATION``.
Randomness for machine ``j`` of phase ``i`` comes from the substream
``(i, j)`` of the configured seed, so traces do not depend on the number of
worker threads or the order machines finish in.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .graph import Graph, RngSeed, SeedLike, as_mask, as_seed, induced_subgraph, mask_to_set
from .oracle import greedy_maximal_matching
from .peeling import (DEFAULT_C_SCALE, CoverResult, PhaseSchedule, local_thresholds,
                      make_schedule, peel_edges, sequential_thresholds)

log = logging.getLogger(__name__)

ROUNDS_PER_PHASE = 3
ROUNDS_PER_FINAL_ITERATION = 2
ROUNDS_SINGLE_MACHINE = 2
DEFAULT_C_AUDIT = 16.0

SINGLE = "single"
ITERATED = "iterated"


class CapacityError(RuntimeError):
    """A machine would have to hold more than its memory allows."""


class AuditError(RuntimeError):
    """A hard invariant of the simulation was violated."""


@dataclass(frozen=True)
class MpcConfig:
    s: Optional[int] = None  # None: linear memory, s = n
    c_scale: float = DEFAULT_C_SCALE
    seed: RngSeed = RngSeed(0)
    final_phase_mode: str = SINGLE
    c_audit: float = DEFAULT_C_AUDIT

    def __post_init__(self):
        object.__setattr__(self, "seed", as_seed(self.seed))
        if self.s is not None and self.s < 2:
            raise ValueError(f"s must be >= 2, got {self.s}")
        if self.final_phase_mode not in (SINGLE, ITERATED):
            raise ValueError(f"unknown final phase mode {self.final_phase_mode!r}")
        if self.c_scale <= 0 or self.c_audit <= 0:
            raise ValueError("c_scale and c_audit must be positive")


@dataclass(frozen=True)
class MachineLoad:
    phase: int
    machine: int
    vertices_held: int
    edges_held: int
    rounds_used: int


@dataclass
class PhaseRecord:
    i: int
    delta: float
    p: float
    k: int
    local_delta: float
    machines: list
    peeled: frozenset
    cleanup_peeled: frozenset
    unsampled: int
    second_sweep: bool = False

    @property
    def all_peeled(self) -> frozenset:
        return self.peeled | self.cleanup_peeled


@dataclass
class MpcTrace:
    n: int
    s: int
    c_scale: float
    seed: RngSeed
    final_phase_mode: str
    schedule: Optional[PhaseSchedule]
    phases: list
    final_peeled: frozenset
    final_rounds: int
    final_load: Optional[MachineLoad]
    residual_edges: int
    final_cover: CoverResult

    @property
    def peeled_per_phase(self) -> list:
        """P_i for each phase, including the high-degree cleanup vertices."""
        return [ph.all_peeled for ph in self.phases]

    @property
    def machine_loads(self) -> list:
        loads = [ld for ph in self.phases for ld in ph.machines]
        if self.final_load is not None:
            loads.append(self.final_load)
        return loads

    @property
    def total_rounds(self) -> int:
        return ROUNDS_PER_PHASE * len(self.phases) + self.final_rounds

    @property
    def max_edges_any_machine(self) -> int:
        return max((ld.edges_held for ld in self.machine_loads), default=0)

    @property
    def cover_size(self) -> int:
        return self.final_cover.size

    @property
    def degenerate(self) -> bool:
        return self.schedule is None or self.schedule.degenerate

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "s": self.s,
            "c_scale": self.c_scale,
            "seed": self.seed.seed,
            "final_phase_mode": self.final_phase_mode,
            "phases": [
                {
                    "i": ph.i,
                    "delta": ph.delta,
                    "p": ph.p,
                    "k": ph.k,
                    "machines": [{"j": ld.machine, "vertices": ld.vertices_held,
                                  "edges": ld.edges_held} for ld in ph.machines],
                    "peeled": sorted(ph.peeled),
                    "cleanup_peeled": sorted(ph.cleanup_peeled),
                    "unsampled": ph.unsampled,
                }
                for ph in self.phases
            ],
            "final_peeled": sorted(self.final_peeled),
            "residual_edges": self.residual_edges,
            "total_rounds": self.total_rounds,
            "cover_size": self.cover_size,
            "max_edges_any_machine": self.max_edges_any_machine,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def memory_budget(n: int, s: int, c_audit: float = DEFAULT_C_AUDIT) -> float:
    """c_audit * s * log2(n)^2; with s = n this is the linear-regime bound."""
    if n < 2:
        return c_audit * max(s, 1)
    return c_audit * s * math.log2(n) ** 2


def round_budget(n: int, s: int, c_scale: float = DEFAULT_C_SCALE) -> int:
    """Upper bound on total rounds: phases plus the final phase."""
    if n < 4:
        return ROUNDS_PER_PHASE * 2 + ROUNDS_SINGLE_MACHINE
    loglog = math.ceil(math.log2(math.log2(n)))
    phases = ROUNDS_PER_PHASE * (loglog + 2)
    if s >= n:
        return phases + ROUNDS_SINGLE_MACHINE
    floor_val = c_scale * (n / s) * math.log2(n)
    return phases + ROUNDS_PER_FINAL_ITERATION * math.ceil(math.log2(floor_val))


# -- machines ------------------------------------------------------------

def machine_sample(seed: RngSeed, n: int, phase: int, machine: int, p: float) -> np.ndarray:
    """V^(j)_i: every vertex of G included independently w.p. p."""
    if p >= 1.0:
        return np.ones(n, dtype=bool)
    return seed.substream(phase, machine).generator().random(n) < p


def _induced_edges(g: Graph, mask: np.ndarray) -> np.ndarray:
    """Edges of g inside ``mask``, gathered through the adjacency lists."""
    verts = np.flatnonzero(mask)
    if verts.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    starts = g.indptr[verts]
    lens = g.indptr[verts + 1] - starts
    total = int(lens.sum())
    if total == 0:
        return np.empty((0, 2), dtype=np.int64)
    offsets = np.repeat(starts - np.cumsum(lens) + lens, lens) + np.arange(total)
    src = np.repeat(verts, lens)
    dst = g.indices[offsets]
    keep = (src < dst) & mask[dst]
    return np.stack([src[keep], dst[keep]], axis=1)


# above this sampling rate, filtering the phase's edge list beats gathering
_DENSE_SAMPLE = 0.25


def _run_machine(g: Graph, alive: np.ndarray, phase_edges: np.ndarray, seed: RngSeed,
                 phase: int, machine: int, p: float, thresholds: list):
    mask = machine_sample(seed, g.n, phase, machine, p) & alive
    if p >= _DENSE_SAMPLE:
        edges = phase_edges[mask[phase_edges[:, 0]] & mask[phase_edges[:, 1]]]
    else:
        edges = _induced_edges(g, mask)
    peels = peel_edges(edges, g.n, thresholds)
    peeled = np.concatenate(peels) if peels else np.empty(0, dtype=np.int64)
    load = MachineLoad(phase, machine, int(mask.sum()), int(edges.shape[0]), ROUNDS_PER_PHASE)
    return load, peeled, mask


def _degrees_within(g: Graph, alive: np.ndarray) -> np.ndarray:
    e = g.edges
    e = e[alive[e[:, 0]] & alive[e[:, 1]]]
    return np.bincount(e[:, 0], minlength=g.n) + np.bincount(e[:, 1], minlength=g.n)


def audit_phase_degree_invariant(g: Graph, alive, delta_next: float) -> bool:
    """Every alive vertex has at most ``delta_next`` alive neighbours."""
    mask = as_mask(alive, g.n)
    if not mask.any():
        return True
    return bool(_degrees_within(g, mask)[mask].max() <= delta_next)


def _run_phase(g: Graph, alive: np.ndarray, sched: PhaseSchedule, idx: int,
               seed: RngSeed, pool: Optional[ThreadPoolExecutor]):
    i = idx + 1
    p, k = sched.probabilities[idx], sched.machine_counts[idx]
    delta_next = sched.thresholds[idx + 1]
    thresholds = local_thresholds(sched.local_thresholds[idx], sched.c_scale * sched.log_n)
    phase_edges = g.edges[alive[g.edges[:, 0]] & alive[g.edges[:, 1]]]

    if p >= 1.0:
        # every machine receives all of G_i, so one computation stands for all k
        load, peeled, mask = _run_machine(g, alive, phase_edges, seed, i, 1, p, thresholds)
        loads = [MachineLoad(i, j, load.vertices_held, load.edges_held, load.rounds_used)
                 for j in range(1, k + 1)]
        peeled_mask = np.zeros(g.n, dtype=bool)
        peeled_mask[peeled] = True
        sampled = mask | ~alive
    else:
        job = lambda j: _run_machine(g, alive, phase_edges, seed, i, j, p, thresholds)
        results = list(pool.map(job, range(1, k + 1))) if pool else [job(j) for j in range(1, k + 1)]
        loads = [r[0] for r in results]
        peeled_mask = np.zeros(g.n, dtype=bool)
        sampled = np.zeros(g.n, dtype=bool)
        for _, peeled, mask in results:
            peeled_mask[peeled] = True
            sampled |= mask
    unsampled = int((alive & ~sampled).sum())

    nxt = alive & ~peeled_mask
    deg = _degrees_within(g, nxt)
    cleanup = nxt & (deg > delta_next)
    nxt &= ~cleanup
    second = False
    if not audit_phase_degree_invariant(g, nxt, delta_next):
        # removals only lower degrees, so this branch should be unreachable
        log.warning("phase %d: degree invariant failed after one sweep; sweeping again", i)
        second = True
        while True:
            deg = _degrees_within(g, nxt)
            extra = nxt & (deg > delta_next)
            if not extra.any():
                break
            cleanup |= extra
            nxt &= ~extra
    record = PhaseRecord(i, sched.thresholds[idx], p, k, sched.local_thresholds[idx], loads,
                         mask_to_set(peeled_mask), mask_to_set(cleanup), unsampled, second)
    return record, nxt


# -- final phase ------------------------------------------------------------

def final_phase_single_machine(g_residual: Graph, alive=None, capacity: Optional[float] = None,
                               seed: Optional[SeedLike] = None) -> frozenset:
    """Endpoints of a greedy maximal matching of the residual graph.

    Raises ``CapacityError`` if the residual's vertices plus edges exceed
    ``capacity``.
    """
    mask = g_residual.vertex_mask() if alive is None else as_mask(alive, g_residual.n)
    residual = induced_subgraph(g_residual, mask)
    held = residual.vertex_count() + residual.m
    if capacity is not None and held > capacity:
        raise CapacityError(f"residual graph needs {held} words, machine capacity is {capacity:.0f}")
    return frozenset(v for e in greedy_maximal_matching(residual, seed=seed) for v in e)


def final_phase_iterated(g_residual: Graph, alive, n: int, s: int,
                         c_scale: float = DEFAULT_C_SCALE, top: Optional[float] = None):
    """Sequential peeling from Δ_τ/2 down to 1, charged per iteration.

    Returns ``(cover, rounds)``.  ``top`` overrides Δ_τ (defaults to the
    schedule's floor threshold for ``n``, ``s``).
    """
    mask = g_residual.vertex_mask() if alive is None else as_mask(alive, g_residual.n)
    e = g_residual.edges
    e = e[mask[e[:, 0]] & mask[e[:, 1]]]
    if e.shape[0] == 0:
        return frozenset(), 0
    if top is None:
        top = make_schedule(n, s, c_scale).floor_threshold
    deg = np.bincount(e[:, 0], minlength=g_residual.n) + np.bincount(e[:, 1], minlength=g_residual.n)
    if deg.max() > top:
        raise AuditError(f"residual max degree {deg.max()} exceeds the last threshold {top}")
    thresholds = sequential_thresholds(top)
    peels = peel_edges(e, g_residual.n, thresholds)
    cover = frozenset(int(v) for ids in peels for v in ids)
    return cover, ROUNDS_PER_FINAL_ITERATION * len(thresholds)


# -- orchestration ----------------------------------------------------------

def parallel_peel(g: Graph, cfg: MpcConfig = MpcConfig(), workers: int = 1) -> MpcTrace:
    """Parallel-Peeling on ``g`` under ``cfg``; returns the full trace."""
    n = g.n
    s = n if cfg.s is None else cfg.s
    seed = cfg.seed
    alive = g.vertex_mask()
    sched = make_schedule(n, s, cfg.c_scale) if n >= 2 else None
    phases = []
    pool = ThreadPoolExecutor(workers) if workers > 1 else None
    try:
        for idx in range(sched.num_phases if sched else 0):
            record, alive = _run_phase(g, alive, sched, idx, seed, pool)
            phases.append(record)
    finally:
        if pool:
            pool.shutdown()

    residual = induced_subgraph(g, alive)
    final_load = None
    if cfg.final_phase_mode == SINGLE:
        capacity = memory_budget(n, s, cfg.c_audit)
        try:
            final = final_phase_single_machine(residual, None, capacity,
                                               seed.substream(len(phases) + 1, 0))
        except CapacityError as exc:
            raise CapacityError(f"final phase (after {len(phases)} phases): {exc}") from None
        final_rounds = ROUNDS_SINGLE_MACHINE
        final_load = MachineLoad(len(phases) + 1, 0, residual.vertex_count(), residual.m,
                                 ROUNDS_SINGLE_MACHINE)
    else:
        top = sched.floor_threshold if sched else 1.0
        final, final_rounds = final_phase_iterated(residual, None, n, s, cfg.c_scale, top=top)

    provenance = {}
    for ph in phases:
        for v in ph.peeled:
            provenance[v] = (ph.i, "local")
        for v in ph.cleanup_peeled:
            provenance[v] = (ph.i, "cleanup")
    for v in final:
        provenance.setdefault(v, (len(phases) + 1, "final"))
    cover = CoverResult(frozenset(provenance), provenance)
    e = g.edges
    mask = as_mask(cover.cover, n)
    if not np.all(mask[e[:, 0]] | mask[e[:, 1]]):
        raise AuditError("parallel peeling produced a set that does not cover every edge")
    return MpcTrace(n, s, float(cfg.c_scale), seed, cfg.final_phase_mode, sched, phases,
                    final, final_rounds, final_load, residual.m, cover)


def audit_memory(trace: MpcTrace, n: int, c_audit: float = DEFAULT_C_AUDIT) -> bool:
    """max edges on any machine <= c_audit * s * log2(n)^2 (s = n if linear)."""
    return trace.max_edges_any_machine <= memory_budget(n, min(trace.s, n), c_audit)


def audit_rounds(trace: MpcTrace) -> bool:
    return trace.total_rounds <= round_budget(trace.n, trace.s, trace.c_scale)
