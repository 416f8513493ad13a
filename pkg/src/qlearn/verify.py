"""Seeded property suites behind ``qlearn verify`` and the acceptance tests.

Each ``*_data`` function does the simulation work and returns raw
measurements; each suite turns those into a pass/fail verdict.
"""
from __future__ import annotations

import contextlib
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator

import numpy as np

from qlearn import quantum
from qlearn.bounds import (
    MultilinearPolynomial,
    acceptance_probabilities,
    binary_entropy,
    bound_report,
    diagonal_dominance_full_rank,
    gv_chain,
    gv_codebook,
    mobius_inversion,
    success_matrix,
)
from qlearn.classical import (
    MembershipOracle,
    PacParams,
    classical_pac_run,
    empirical_error,
    exact_upper_bound,
    greedy_exact_learner,
    hard_pac_distribution,
    pac_sample_size,
    random_query_strategy,
    similarity_oracle_for,
    trial_rng,
)
from qlearn.concepts import (
    Concept,
    ConceptClass,
    Distribution,
    builtin_classes,
    gamma_hat,
    parity_class,
    point_functions_plus_zero,
    typical_concept,
    vc_dimension,
)
from qlearn.learners import build_parity_learner, certify_learner, qex_sampling_learner
from qlearn.quantum import (
    QuantumState,
    euclidean_distance,
    measure_distribution,
    query_magnitudes,
    random_network,
    run_network,
    run_with_overrides,
    total_variation,
)

SEED = 20240601


@dataclass
class SuiteResult:
    name: str
    passed: bool
    checks: int
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"suite": self.name, "passed": self.passed, "checks": self.checks, "details": self.details}


# ----------------------------------------------------------------- parity ---

def parity_data(ns=range(1, 7)) -> list[dict]:
    rows = []
    for n in ns:
        cls = parity_class(n)
        cert = certify_learner(build_parity_learner(n), cls)
        rows.append({
            "n": n,
            "targets": len(cls),
            "T": cert.T,
            "min_success": cert.min_success,
            "size_bound": math.log2(len(cls)) / (2 * n),
        })
    return rows


def suite_parity() -> SuiteResult:
    rows = parity_data()
    ok = all(r["T"] == 1 and abs(r["min_success"] - 1) <= 1e-9 and r["T"] >= r["size_bound"] for r in rows)
    return SuiteResult("parity", ok, len(rows), {"rows": rows})


# ----------------------------------------------------------------- degree ---

def degree_data(count: int = 200, seed: int = SEED) -> list[dict]:
    rows = []
    for k in range(count):
        rng = trial_rng(seed, k)
        n = int(rng.integers(1, 3))
        T = int(rng.integers(0, 3))
        net = random_network(n, T, rng, m=n + 1 + int(rng.integers(0, 2)))
        B = np.flatnonzero(rng.random(1 << net.m) < 0.5)
        probs = acceptance_probabilities(net, B)
        N = 1 << n
        poly = MultilinearPolynomial(N, mobius_inversion(probs, N))
        rows.append({
            "n": n,
            "T": T,
            "high_degree_max": poly.max_coefficient_above(2 * T),
            "residual": float(np.abs(poly.values() - probs).max()),
        })
    return rows


def suite_degree() -> SuiteResult:
    rows = degree_data()
    ok = all(r["high_degree_max"] < 1e-7 and r["residual"] < 1e-9 for r in rows)
    return SuiteResult("degree", ok, len(rows), {
        "worst_high_degree": max(r["high_degree_max"] for r in rows),
        "worst_residual": max(r["residual"] for r in rows),
    })


# ----------------------------------------------------------------- hybrid ---

def override_set(q: np.ndarray, budget: float, rng: np.random.Generator) -> dict[tuple[int, int], int]:
    """Random (t, x) pairs whose total query magnitude stays within ``budget``.

    Pairs are visited in random order and kept while the running total fits;
    each kept pair gets a random override bit.
    """
    pairs = [(t, x) for t in range(q.shape[0]) for x in range(q.shape[1])]
    order = rng.permutation(len(pairs))
    used, table = 0.0, {}
    for k in order:
        t, x = pairs[k]
        if used + q[t, x] <= budget:
            used += q[t, x]
            table[(t, x)] = int(rng.integers(0, 2))
    return table


def hybrid_data(count: int = 100, eps: float = 0.1, seed: int = SEED) -> list[dict]:
    """Random (network, concept, override set) triples meeting sum_F q <= eps^2/T.

    Networks use near-identity stages so that many strings carry little query
    magnitude and the override sets are non-trivial.
    """
    rows = []
    for k in range(count):
        rng = trial_rng(seed, k)
        n = int(rng.integers(1, 4))
        T = int(rng.integers(1, 4))
        net = random_network(n, T, rng, m=n + 2, spread=float(rng.uniform(0.005, 0.1)))
        c = Concept(n, rng.integers(0, 2, 1 << n))
        q = query_magnitudes(net, c)
        F = override_set(q, eps**2 / T, rng)
        final = run_network(net, c).final
        dist = euclidean_distance(final, run_with_overrides(net, c, F))
        flips = sum(a != c(x) for (t, x), a in F.items())
        rows.append({
            "n": n,
            "T": T,
            "overrides": len(F),
            "flips": int(flips),
            "mass": float(sum(q[t, x] for t, x in F)),
            "distance": dist,
        })
    return rows


def hybrid_zero_cases(seed: int = SEED) -> list[float]:
    """Distances for F = {} and for overrides equal to the true answers (both must be 0)."""
    out = []
    for k in range(10):
        rng = trial_rng(seed + 1, k)
        n, T = 2, 2
        net = random_network(n, T, rng)
        c = Concept(n, rng.integers(0, 2, 1 << n))
        final = run_network(net, c).final
        out.append(euclidean_distance(final, run_with_overrides(net, c, {})))
        same = {(t, x): c(x) for t in range(T) for x in range(1 << n)}
        out.append(euclidean_distance(final, run_with_overrides(net, c, same)))
    return out


def suite_hybrid(eps: float = 0.1) -> SuiteResult:
    """Checks the provable 2*eps displacement; literal eps exceedances are reported."""
    rows = hybrid_data(eps=eps)
    zeros = hybrid_zero_cases()
    ok = all(r["distance"] <= 2 * eps + 1e-12 for r in rows) and max(zeros) == 0.0
    return SuiteResult("hybrid", ok, len(rows) + len(zeros), {
        "max_distance": max(r["distance"] for r in rows),
        "above_eps": sum(r["distance"] > eps for r in rows),
        "nonempty_override_sets": sum(r["overrides"] > 0 for r in rows),
        "zero_case_max": max(zeros),
    })


# --------------------------------------------------------------- tv_bound ---

def tv_bound_data(count: int = 1000, seed: int = SEED, max_subset: int = 4) -> list[dict]:
    """TV/Euclidean ratios for random state pairs over every qubit subset of size <= 4."""
    rows = []
    for k in range(count):
        rng = trial_rng(seed + 2, k)
        m = int(rng.integers(1, 6))
        phi = QuantumState.random(m, rng)
        if k % 2:
            psi = QuantumState.random(m, rng)
        else:
            noise = QuantumState.random(m, rng).amplitudes
            v = phi.amplitudes + 10 ** rng.uniform(-4, 0) * noise
            psi = QuantumState(m, v / np.linalg.norm(v))
        e = euclidean_distance(phi, psi)
        worst = 0.0
        for size in range(1, min(m, max_subset) + 1):
            for sub in itertools.combinations(range(m), size):
                tv = total_variation(measure_distribution(phi, sub), measure_distribution(psi, sub))
                worst = max(worst, tv - 4 * e)
        rows.append({"m": m, "euclidean": e, "worst_slack": worst})
    return rows


def suite_tv_bound() -> SuiteResult:
    rows = tv_bound_data()
    ok = all(r["worst_slack"] <= 1e-12 for r in rows)
    return SuiteResult("tv_bound", ok, len(rows), {"max_tv_minus_4e": max(r["worst_slack"] for r in rows)})


# -------------------------------------------------------------- adversary ---

def adversary_data(random_strategies: int = 100, seed: int = SEED, max_size: int = 20) -> list[dict]:
    rows = []
    for name, cls in builtin_classes().items():
        if len(cls) > max_size or len(cls) < 2:
            continue
        stats = gamma_hat(cls)
        size_bound = math.ceil(math.log2(len(cls))) - 1
        sim_bound = 1 / (2 * float(stats.gamma_hat)) - 1

        major = MembershipOracle.majority_adversary(cls)
        sim = similarity_oracle_for(cls, stats)
        greedy_exact_learner(cls, major)
        greedy_exact_learner(cls, sim)
        greedy_major, greedy_sim = major.forced, sim.forced
        rand_major, rand_sim = [], []
        for k in range(random_strategies):
            rng = trial_rng(seed + 3, k)
            rand_major.append(random_query_strategy(MembershipOracle.majority_adversary(cls), cls.n, rng))
            rand_sim.append(random_query_strategy(similarity_oracle_for(cls, stats), cls.n, rng))
        rows.append({
            "class": name,
            "size": len(cls),
            "gamma_hat": str(stats.gamma_hat),
            "size_bound": size_bound,
            "similarity_bound": sim_bound,
            "greedy_majority": greedy_major,
            "greedy_similarity": greedy_sim,
            "random_majority_min": min(rand_major),
            "random_similarity_min": min(rand_sim),
        })
    return rows


def suite_adversary() -> SuiteResult:
    rows = adversary_data()
    ok = all(
        min(r["greedy_majority"], r["random_majority_min"]) >= r["size_bound"]
        and min(r["greedy_similarity"], r["random_similarity_min"]) >= r["similarity_bound"]
        for r in rows
    )
    return SuiteResult("adversary", ok, len(rows), {"rows": rows})


# ------------------------------------------------------------------ upper ---

def upper_data() -> list[dict]:
    rows = []
    for name, cls in builtin_classes().items():
        g = gamma_hat(cls).gamma_hat
        budget = exact_upper_bound(len(cls), g)
        worst, exact = 0, True
        for c in cls:
            h, q = greedy_exact_learner(cls, MembershipOracle.honest(c))
            worst = max(worst, q)
            exact &= h == c
        rows.append({"class": name, "max_queries": worst, "upper": budget, "exact": bool(exact)})
    return rows


def suite_upper() -> SuiteResult:
    rows = upper_data()
    ok = all(r["exact"] and r["max_queries"] <= r["upper"] for r in rows)
    return SuiteResult("upper", ok, len(rows), {"rows": rows})


# ------------------------------------------------------------------ gamma ---

def gamma_by_definition(cls: ConceptClass) -> Fraction:
    """min over C' of max over a of min over b, spelled out with Fractions."""
    best = Fraction(1)
    tables = [tuple(c.table) for c in cls]
    for size in range(2, len(tables) + 1):
        for sub in itertools.combinations(tables, size):
            value = max(
                min(Fraction(sum(t[a] == b for t in sub), size) for b in (0, 1))
                for a in range(cls.N)
            )
            best = min(best, value)
    return best


def suite_gamma() -> SuiteResult:
    cases = {
        "points_plus_zero n=2": (point_functions_plus_zero(2), Fraction(1, 5)),
        "two concepts": (ConceptClass(2, (Concept(2, [0, 1, 1, 0]), Concept(2, [1, 1, 1, 0]))), Fraction(1, 2)),
        "parity n=3": (parity_class(3), None),
    }
    details, ok = {}, True
    for name, (cls, expected) in cases.items():
        fast, slow = gamma_hat(cls).gamma_hat, gamma_by_definition(cls)
        ok &= fast == slow and (expected is None or fast == expected)
        details[name] = str(fast)
    return SuiteResult("gamma", bool(ok), len(cases), details)


# -------------------------------------------------------------------- pac ---

def pac_data(trials: int = 200, eps: float = 0.1, delta: float = 0.1, seed: int = SEED) -> list[dict]:
    params = PacParams(eps, delta)
    rows = []
    for cls_name, cls in (("points_plus_zero n=2", point_functions_plus_zero(2)), ("parity n=3", parity_class(3))):
        d = vc_dimension(cls)[0]
        for dist_name, dist in (("uniform", Distribution.uniform(cls.n)), ("hard", hard_pac_distribution(cls))):
            for learner_name in ("classical", "qex"):
                for ti, target in enumerate(cls):
                    wins = 0
                    for k in range(trials):
                        rng = trial_rng(seed + 4, k * 1000 + ti)
                        if learner_name == "classical":
                            h = classical_pac_run(cls, target, dist, params, rng, d)
                        else:
                            h = qex_sampling_learner(cls, target, dist, params, rng)
                        wins += empirical_error(h, target, dist) <= eps
                    rows.append({
                        "class": cls_name,
                        "dist": dist_name,
                        "learner": learner_name,
                        "target": target.to_hex(),
                        "sample_size": pac_sample_size(params, d),
                        "success_rate": wins / trials,
                    })
    return rows


def suite_pac() -> SuiteResult:
    rows = pac_data()
    ok = all(r["success_rate"] >= 0.9 for r in rows)
    return SuiteResult("pac", ok, len(rows), {"min_success_rate": min(r["success_rate"] for r in rows)})


# ------------------------------------------------------------- gershgorin ---

def random_dominant_matrix(rng: np.random.Generator) -> np.ndarray:
    size = int(rng.integers(2, 17))
    A = rng.normal(size=(size, size))
    if rng.random() < 0.5:
        A = A + 1j * rng.normal(size=(size, size))
    off = np.abs(A).sum(axis=1) - np.abs(np.diagonal(A))
    margin = rng.uniform(1e-3, 1.0, size)
    sign = rng.choice([-1.0, 1.0], size)
    np.fill_diagonal(A, sign * (off + margin))
    return A


def gershgorin_data(count: int = 500, seed: int = SEED) -> list[dict]:
    rows = []
    for k in range(count):
        A = random_dominant_matrix(trial_rng(seed + 5, k))
        rep = diagonal_dominance_full_rank(A)
        rows.append({"size": len(A), "dominant": rep.dominant, "rank_full": rep.rank_full,
                     "disk_excess": rep.max_disk_excess})
    return rows


def suite_gershgorin() -> SuiteResult:
    rows = gershgorin_data()
    L = success_matrix(build_parity_learner(3), parity_class(3))
    ok = all(r["dominant"] and r["rank_full"] and r["disk_excess"] <= 1e-6 for r in rows) and L.transpose_dominant
    return SuiteResult("gershgorin", ok, len(rows) + 1, {
        "max_disk_excess": max(r["disk_excess"] for r in rows),
        "parity_success_transpose_dominant": L.transpose_dominant,
    })


# --------------------------------------------------------------------- gv ---

def gv_data(max_d: int = 24) -> list[dict]:
    rows = []
    for d in range(1, max_d + 1):
        book = gv_codebook(d)
        chain = gv_chain(d)
        rows.append({
            "d": d,
            "size": len(book.codewords),
            "required_size": 2 ** (d // 6),
            "min_distance": book.min_distance if len(book.codewords) > 1 else None,
            "required_distance": math.ceil(d / 4),
            "chain_holds": chain.holds,
        })
    return rows


def suite_gv() -> SuiteResult:
    rows = gv_data()
    h = binary_entropy(0.25)
    ok = all(
        r["size"] >= r["required_size"]
        and (r["min_distance"] is None or r["min_distance"] >= r["required_distance"])
        and r["chain_holds"]
        for r in rows
    ) and round(h, 6) == 0.811278 and 1 - h > 1 / 6
    return SuiteResult("gv", ok, len(rows), {"H(1/4)": round(h, 6)})


# ------------------------------------------------------------ consistency ---

def consistency_data(params: PacParams = PacParams(0.1, 0.1)) -> list[dict]:
    """Measured complexity of every shipped learner next to its lower bounds."""
    rows = []
    for name, cls in builtin_classes().items():
        rep = bound_report(cls, params)
        honest = max(greedy_exact_learner(cls, MembershipOracle.honest(c))[1] for c in cls)
        majority = greedy_exact_learner(cls, MembershipOracle.majority_adversary(cls))[1]
        similarity = greedy_exact_learner(cls, similarity_oracle_for(cls))[1]
        row = {
            "class": name,
            "classical_exact_lower": rep.classical.exact_lower,
            "classical_exact_upper": rep.classical.upper,
            "greedy_worst_honest": honest,
            "greedy_vs_majority": majority,
            "greedy_vs_similarity": similarity,
            "pac_samples": rep.classical.pac_upper,
            "classical_pac_lower": rep.classical.vc,
            "quantum_pac_lower": rep.quantum.vc,
            "quantum_exact_lower": rep.quantum.exact_lower,
            "quantum_T": None,
        }
        if cls.kind == "parity" and cls.n <= 8:
            cert = certify_learner(build_parity_learner(cls.n), cls)
            if cert.verdict:
                row["quantum_T"] = cert.T
        rows.append(row)
    return rows


def consistency_violations(rows: list[dict]) -> list[str]:
    bad = []
    for r in rows:
        for key in ("greedy_worst_honest", "greedy_vs_majority", "greedy_vs_similarity"):
            if r[key] < r["classical_exact_lower"]:
                bad.append(f"{r['class']}: {key}={r[key]} < {r['classical_exact_lower']}")
        if r["greedy_worst_honest"] > r["classical_exact_upper"]:
            bad.append(f"{r['class']}: greedy exceeds upper bound")
        if r["pac_samples"] < r["classical_pac_lower"] or r["pac_samples"] < r["quantum_pac_lower"]:
            bad.append(f"{r['class']}: PAC sample size below VC lower bound")
        if r["quantum_T"] is not None and r["quantum_T"] < r["quantum_exact_lower"]:
            bad.append(f"{r['class']}: quantum T={r['quantum_T']} < {r['quantum_exact_lower']}")
    return bad


def suite_consistency() -> SuiteResult:
    rows = consistency_data()
    bad = consistency_violations(rows)
    return SuiteResult("consistency", not bad, len(rows), {"violations": bad})


# ------------------------------------------------------------ distinguish ---

def distinguishable_count(net, cls: ConceptClass, eps: float) -> tuple[int, float]:
    """Concepts whose final state is > eps from the typical concept's, and |C'| gamma-hat."""
    stats = gamma_hat(cls)
    sub = cls.subset(stats.witness_subset)
    c_hat = typical_concept(sub)
    ref = run_network(net, c_hat).final
    far = sum(euclidean_distance(ref, run_network(net, c).final) > eps for c in sub)
    return int(far), len(sub) * float(stats.gamma_hat)


def distinguish_data(count: int = 60, seed: int = SEED) -> list[dict]:
    rows = []
    for k in range(count):
        rng = trial_rng(seed + 6, k)
        n = int(rng.integers(1, 4))
        T = int(rng.integers(1, 4))
        eps = float(rng.uniform(0.2, 1.0))
        cls = point_functions_plus_zero(n)
        net = random_network(n, T, rng, spread=float(rng.choice([0.05, 0.3, 1.0])))
        far, mass = distinguishable_count(net, cls, eps)
        rows.append({"n": n, "T": T, "eps": eps, "far": far,
                     "stated_bound": T**2 * mass / eps**2, "provable_bound": 4 * T**2 * mass / eps**2})
    return rows


def suite_distinguish() -> SuiteResult:
    rows = distinguish_data()
    ok = all(r["far"] <= r["provable_bound"] for r in rows)
    return SuiteResult("distinguish", ok, len(rows), {"above_stated": sum(r["far"] > r["stated_bound"] for r in rows)})


SUITES: dict[str, Callable[[], SuiteResult]] = {
    "parity": suite_parity,
    "degree": suite_degree,
    "hybrid": suite_hybrid,
    "tv_bound": suite_tv_bound,
    "adversary": suite_adversary,
    "upper": suite_upper,
    "gamma": suite_gamma,
    "pac": suite_pac,
    "gershgorin": suite_gershgorin,
    "gv": suite_gv,
    "consistency": suite_consistency,
    "distinguish": suite_distinguish,
}


@contextlib.contextmanager
def injected_qmq_fault() -> Iterator[None]:
    """Flip the oracle's answer on string 0 for every QMQ call (mutation smoke test)."""
    original = quantum.apply_answer_bits

    def faulty(state, n, answers):
        answers = np.array(answers, dtype=np.uint8)
        answers[0] ^= 1
        return original(state, n, answers)

    quantum.apply_answer_bits = faulty
    try:
        yield
    finally:
        quantum.apply_answer_bits = original


def run_suites(names: list[str] | None = None, inject_fault: bool = False) -> list[SuiteResult]:
    names = names or list(SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError(f"unknown suite(s): {', '.join(unknown)}")
    ctx = injected_qmq_fault() if inject_fault else contextlib.nullcontext()
    with ctx:
        return [SUITES[name]() for name in names]
