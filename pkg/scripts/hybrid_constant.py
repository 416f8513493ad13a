"""How large can the override displacement get relative to eps?

For each eps, draws seeded (network, concept, override set) triples with
total overridden query magnitude <= eps^2 / T and reports the distribution
of ||phi_T - phi~_T|| / eps.  Ratios above 1 occur; none exceed 2.
"""
import argparse

import numpy as np

from qlearn.verify import SEED, hybrid_data


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--trials", type=int, default=300)
    ap.add_argument("--seed", type=int, default=SEED)
    ap.add_argument("--eps", type=float, nargs="+", default=[0.05, 0.1, 0.2])
    args = ap.parse_args()

    print(f"{'eps':>6} {'trials':>7} {'>eps':>6} {'max ratio':>10} {'p99 ratio':>10}")
    for eps in args.eps:
        rows = hybrid_data(args.trials, eps=eps, seed=args.seed)
        ratio = np.array([r["distance"] / eps for r in rows])
        print(f"{eps:6.3f} {len(rows):7d} {int((ratio > 1).sum()):6d} {ratio.max():10.4f} {np.quantile(ratio, 0.99):10.4f}")


if __name__ == "__main__":
    main()
