"""Acceptance gate: criteria 1-11 at their stated tolerances.

Each test records one PASS/FAIL line; the lines are printed together in the
pytest terminal summary.
"""
import math
import time
from fractions import Fraction

import numpy as np

from conftest import ACCEPTANCE_LINES
from oracles import gamma_hat_bruteforce
from qlearn.bounds import binary_entropy, diagonal_dominance_full_rank, success_matrix
from qlearn.classical import trial_rng
from qlearn.concepts import Concept, ConceptClass, gamma_hat, parity_class, point_functions_plus_zero
from qlearn.learners import build_parity_learner, certify_learner
from qlearn.verify import (
    SEED,
    adversary_data,
    consistency_data,
    consistency_violations,
    degree_data,
    gershgorin_data,
    gv_data,
    hybrid_data,
    hybrid_zero_cases,
    pac_data,
    parity_data,
    tv_bound_data,
    upper_data,
)


def record(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"criterion {number:2d} {title}: {'PASS' if ok else 'FAIL'} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_01_parity_tightness():
    start = time.perf_counter()
    rows = parity_data(range(1, 7))
    elapsed = time.perf_counter() - start
    ok = (
        all(r["targets"] == 2 ** r["n"] for r in rows)
        and all(r["T"] == 1 for r in rows)
        and all(abs(r["min_success"] - 1) <= 1e-9 for r in rows)
        and all(1 >= r["size_bound"] == 0.5 for r in rows)
        and elapsed < 10
    )
    worst = min(r["min_success"] for r in rows)
    record(1, "parity learner exact with one query", ok, f"n=1..6, min success {worst:.12f}, {elapsed:.2f}s")


def test_criterion_02_degree_bound():
    start = time.perf_counter()
    rows = degree_data(200)
    elapsed = time.perf_counter() - start
    high = max(r["high_degree_max"] for r in rows)
    resid = max(r["residual"] for r in rows)
    ok = (
        len(rows) == 200
        and {r["T"] for r in rows} == {0, 1, 2}
        and {r["n"] for r in rows} == {1, 2}
        and high < 1e-7
        and resid < 1e-9
        and elapsed < 60
    )
    record(2, "acceptance polynomial degree <= 2T", ok,
           f"max high-degree coeff {high:.2e}, max residual {resid:.2e}, {elapsed:.2f}s")


def test_criterion_03_hybrid_override():
    eps = 0.1
    rows = hybrid_data(100, eps=eps)
    zeros = hybrid_zero_cases()
    budget_ok = all(r["mass"] <= eps**2 / r["T"] + 1e-15 for r in rows)
    worst = max(r["distance"] for r in rows)
    above = sum(r["distance"] > eps for r in rows)
    ok = budget_ok and above == 0 and max(zeros) == 0.0
    record(3, "override displacement <= eps", ok,
           f"{above}/100 trials above {eps}, max {worst:.4f}, zero cases max {max(zeros)}")


def test_criterion_04_tv_vs_euclidean():
    rows = tv_bound_data(1000)
    slack = max(r["worst_slack"] for r in rows)
    ok = len(rows) == 1000 and slack <= 0
    record(4, "TV <= 4 * Euclidean", ok, f"max TV - 4E over all subsets {slack:.3e}")


def test_criterion_05_adversary_lower_bounds():
    rows = adversary_data(100)
    bad = [
        r["class"] for r in rows
        if min(r["greedy_majority"], r["random_majority_min"]) < r["size_bound"]
        or min(r["greedy_similarity"], r["random_similarity_min"]) < r["similarity_bound"]
    ]
    ok = not bad and len(rows) == 12
    record(5, "adversaries force their lower bounds", ok, f"{len(rows)} classes, violations {bad}")


def test_criterion_06_greedy_upper_bound():
    rows = upper_data()
    bad = [r["class"] for r in rows if not r["exact"] or r["max_queries"] > r["upper"]]
    record(6, "greedy learner within ceil(log|C| / -log(1 - gamma))", not bad,
           f"{len(rows)} classes, violations {bad}")


def test_criterion_07_gamma_oracle():
    ppz = point_functions_plus_zero(2)
    fast = gamma_hat(ppz).gamma_hat
    slow = gamma_hat_bruteforce([tuple(int(v) for v in c.table) for c in ppz])
    pairs_ok = True
    for k in range(50):
        rng = trial_rng(SEED + 7, k)
        n = int(rng.integers(1, 4))
        a = rng.integers(0, 2, 1 << n)
        b = rng.integers(0, 2, 1 << n)
        if np.array_equal(a, b):
            b[0] ^= 1
        cls = ConceptClass(n, (Concept(n, a), Concept(n, b)))
        g = gamma_hat(cls).gamma_hat
        pairs_ok &= g == Fraction(1, 2) == gamma_hat_bruteforce([tuple(a), tuple(b)])
    ok = fast == slow == Fraction(1, 5) and pairs_ok
    record(7, "gamma-hat matches subset enumeration", ok, f"points_plus_zero(2) -> {fast}, 50 pairs -> 1/2")


def test_criterion_08_pac_guarantee():
    start = time.perf_counter()
    rows = pac_data(200, eps=0.1, delta=0.1)
    elapsed = time.perf_counter() - start
    worst = min(r["success_rate"] for r in rows)
    combos = {(r["class"], r["dist"], r["learner"]) for r in rows}
    ok = len(combos) == 8 and worst >= 0.9 and elapsed < 60
    record(8, "PAC learners reach error <= eps w.p. >= 1 - delta", ok,
           f"{len(rows)} (class, dist, learner, target) cells, min rate {worst:.3f}, {elapsed:.2f}s")


def test_criterion_09_gershgorin():
    rows = gershgorin_data(500)
    excess = max(r["disk_excess"] for r in rows)
    parity_ok = True
    for n in range(1, 7):
        net = build_parity_learner(n)
        if certify_learner(net, parity_class(n)).verdict:
            L = success_matrix(net, parity_class(n))
            parity_ok &= L.transpose_dominant and diagonal_dominance_full_rank(L.L.T).rank_full
        else:
            parity_ok = False
    ok = all(r["dominant"] and r["rank_full"] for r in rows) and excess <= 1e-6 and parity_ok
    record(9, "dominant matrices full rank, eigenvalues in disks", ok,
           f"500 matrices, max disk excess {excess:.2e}, parity success matrices dominant {parity_ok}")


def test_criterion_10_gv_codebook():
    rows = gv_data(24)
    h = binary_entropy(0.25)
    ok = (
        len(rows) == 24
        and all(r["size"] >= 2 ** (r["d"] // 6) for r in rows)
        and all(r["min_distance"] is None or r["min_distance"] >= math.ceil(r["d"] / 4) for r in rows)
        and round(h, 6) == 0.811278
        and round(1 - h, 6) > round(1 / 6, 6)
    )
    record(10, "greedy GV codebook", ok, f"d=1..24, H(1/4)={h:.6f}, 1-H={1 - h:.6f} > {1 / 6:.6f}")


def test_criterion_11_bound_consistency():
    rows = consistency_data()
    bad = consistency_violations(rows)
    record(11, "measured complexity >= every lower bound", not bad, f"{len(rows)} classes, violations {bad}")
