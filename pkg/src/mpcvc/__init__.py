"""Deterministic MPC simulation of round-compressed parallel peeling for
O(log n)-approximate vertex cover, with exact oracles and auditors."""

from .graph import (Graph, GraphFormatError, ParameterError, RngSeed, complete_graph, cycle_graph,
                    gen_bipartite_gnp, gen_gnp, induced_subgraph, is_vertex_cover, path_graph,
                    petersen_graph, read_edge_list, star_graph, write_edge_list)
from .peeling import (CoverResult, PeelTrace, PhaseSchedule, local_peel, make_schedule,
                      sequential_peel)
from .mpc import (AuditError, CapacityError, MpcConfig, MpcTrace, audit_memory, audit_rounds,
                  memory_budget, parallel_peel, round_budget)
from .oracle import (OracleRefusal, brute_force_min_vc, exact_min_vc, greedy_maximal_matching,
                     hypothetical_process, sandwich_audit)
from .random_structures import (chernoff_bound, bounded_differences_bound, concentration_suite,
                                extract_induced_matching, throw_balls, verify_induced_matching)
from .experiments import ExperimentConfig, RunReport, emit_plot_data, run_experiment

__all__ = [name for name in dir() if not name.startswith("_")]
