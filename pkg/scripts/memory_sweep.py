"""Rounds and per-machine edges of parallel_peel on gnp(n, p) across memory sizes.

    python scripts/memory_sweep.py --n 4096 --p 0.02 --seeds 20 --out sweep.csv
"""

import argparse

from mpcvc.experiments import ExperimentConfig, emit_plot_data, run_experiment


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=4096)
    ap.add_argument("--p", type=float, default=0.02)
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--out", default="memory_sweep.csv")
    args = ap.parse_args()
    n = args.n
    cfg = ExperimentConfig("memory-sweep", gen=f"gnp:{n}:{args.p}", seeds=list(range(args.seeds)),
                           s_values=[n, round(n ** 0.75), round(n ** 0.5)])
    rep = run_experiment(cfg)
    emit_plot_data(rep, ["s", "seed", "total_rounds", "round_budget", "max_edges",
                         "memory_budget"], args.out)
    for s, agg in rep.summary["per_s"].items():
        print(f"s={s:>6}  max rounds {agg['max_rounds']:>3}  max edges {agg['max_edges']:>8}  "
              f"memory ok {agg['memory_ok']}/{agg['runs']}")
    print("audits:", rep.audits)


if __name__ == "__main__":
    main()
