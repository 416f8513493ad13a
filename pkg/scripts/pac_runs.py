"""PAC success rates for the consistent and QEX-sampling learners."""
import argparse
from collections import defaultdict

from qlearn.verify import SEED, pac_data


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--epsilon", type=float, default=0.1)
    ap.add_argument("--delta", type=float, default=0.1)
    ap.add_argument("--seed", type=int, default=SEED)
    args = ap.parse_args()

    rows = pac_data(args.trials, eps=args.epsilon, delta=args.delta, seed=args.seed)
    worst = defaultdict(lambda: 1.0)
    samples = {}
    for r in rows:
        key = (r["class"], r["dist"], r["learner"])
        worst[key] = min(worst[key], r["success_rate"])
        samples[key] = r["sample_size"]
    print(f"{'class':<22} {'dist':<8} {'learner':<10} {'m':>6} {'min rate':>9}")
    for (cls, dist, learner), rate in worst.items():
        print(f"{cls:<22} {dist:<8} {learner:<10} {samples[cls, dist, learner]:>6} {rate:>9.3f}")
    print(f"\nrequired: {1 - args.delta:.3f}")


if __name__ == "__main__":
    main()
