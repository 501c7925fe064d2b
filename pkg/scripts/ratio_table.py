"""Parallel and sequential cover sizes against exact opt on small random graphs.

    python scripts/ratio_table.py --graphs 100
"""

import argparse
import math

import numpy as np

from mpcvc import MpcConfig, exact_min_vc, gen_gnp, parallel_peel, sequential_peel


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--graphs", type=int, default=100)
    ap.add_argument("--max-n", type=int, default=40)
    ap.add_argument("--c-scale", type=float, default=2.0)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print("n,p,opt,sequential,parallel,log2n")
    for k in range(args.graphs):
        n = int(rng.integers(8, args.max_n + 1))
        p = float(rng.uniform(0.05, 0.6))
        g = gen_gnp(n, p, k)
        opt = len(exact_min_vc(g))
        par = parallel_peel(g, MpcConfig(c_scale=args.c_scale, seed=k)).cover_size
        print(f"{n},{p:.3f},{opt},{sequential_peel(g).size},{par},{math.log2(n):.2f}")


if __name__ == "__main__":
    main()
