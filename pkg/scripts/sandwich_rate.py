"""Inclusion rate of the sandwich audit over a seed sweep.

    python scripts/sandwich_rate.py --n 2048 --p 0.01 --seeds 100
"""

import argparse

from mpcvc.experiments import ExperimentConfig, emit_plot_data, run_experiment


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=2048)
    ap.add_argument("--p", type=float, default=0.01)
    ap.add_argument("--c-scale", type=float, default=2.0)
    ap.add_argument("--seeds", type=int, default=100)
    ap.add_argument("--out", default="sandwich.csv")
    args = ap.parse_args()
    rep = run_experiment(ExperimentConfig("sandwich", gen=f"gnp:{args.n}:{args.p}",
                                          c_scale=args.c_scale, seeds=list(range(args.seeds))))
    emit_plot_data(rep, ["seed", "holds"], args.out)
    print(f"inclusion rate {rep.summary['inclusion_rate']:.2f}")
    for v in rep.summary["violations"]:
        print("violation:", v)


if __name__ == "__main__":
    main()
