"""Print every bound next to the measured query counts for the built-in classes."""
import argparse

from qlearn.classical import PacParams
from qlearn.verify import consistency_data, consistency_violations


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--epsilon", type=float, default=0.1)
    ap.add_argument("--delta", type=float, default=0.1)
    args = ap.parse_args()

    rows = consistency_data(PacParams(args.epsilon, args.delta))
    cols = ["class", "classical_exact_lower", "greedy_worst_honest", "greedy_vs_majority",
            "greedy_vs_similarity", "classical_exact_upper", "quantum_exact_lower", "quantum_T", "pac_samples"]
    widths = [max(len(c), 22) if i == 0 else len(c) for i, c in enumerate(cols)]
    print("  ".join(c.ljust(w) for c, w in zip(cols, widths)))
    for r in rows:
        cells = []
        for c, w in zip(cols, widths):
            v = r[c]
            cells.append((f"{v:.3f}" if isinstance(v, float) else str(v)).ljust(w))
        print("  ".join(cells))
    bad = consistency_violations(rows)
    print(f"\nviolations: {len(bad)}")
    for line in bad:
        print("  " + line)


if __name__ == "__main__":
    main()
