"""Quantum learners: the one-query parity learner, QEX sampling, certification."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from qlearn.classical import PacParams, consistent_hypothesis, pac_sample_size
from qlearn.concepts import Concept, ConceptClass, Distribution, parity_class, vc_dimension
from qlearn.quantum import Gates, Oracle, QueryNetwork, measure_distribution, prepare_qex, run_network

DEFAULT_THRESHOLD = Fraction(2, 3)


def _kickback_stages(n: int) -> list:
    prep = [("X", n)] + [("H", q) for q in range(n + 1)]
    unprep = [("H", q) for q in range(n + 1)]
    return [Gates(tuple(prep)), Oracle(), Gates(tuple(unprep))]


def build_parity_learner(n: int) -> QueryNetwork:
    """Bernstein-Vazirani style network: one QMQ call reveals the parity index a.

    The answer qubit is prepared in (|0> - |1>)/sqrt(2) so the oracle acts as
    the phase (-1)^{a.x}; Hadamards on the query register then map the state
    to |a>.  Measuring the query register decodes directly to c_a.
    """
    if not 1 <= n <= 8:
        raise ValueError("parity learner supports 1 <= n <= 8")
    tables = parity_class(n).concepts  # index a holds c_a
    return QueryNetwork(
        m=n + 1,
        n=n,
        stages=_kickback_stages(n),
        measured=tuple(range(n)),
        decode=lambda a: tables[a],
        name=f"parity-learner(n={n})",
    )


def deutsch_jozsa_network(n: int) -> QueryNetwork:
    """Same circuit as the parity learner; outcome 0^n means 'constant'."""
    zero = Concept.zero(n)
    return QueryNetwork(
        m=n + 1,
        n=n,
        stages=_kickback_stages(n),
        measured=tuple(range(n)),
        decode=lambda a: zero if a == 0 else None,
        name=f"deutsch-jozsa(n={n})",
    )


def constant_output_network(n: int, output: Concept) -> QueryNetwork:
    """T = 0 network that always declares ``output``."""
    return QueryNetwork(m=n + 1, n=n, stages=[Gates()], measured=tuple(range(n)),
                        decode=lambda _: output, name="constant-output")


def outcome_hypotheses(net: QueryNetwork, c: Concept) -> tuple[np.ndarray, list]:
    """Exact outcome probabilities for ``net`` on QMQ_c and the decoded hypotheses."""
    final = run_network(net, c).final
    probs = measure_distribution(final, net.measured).weights
    decode = net.decode or (lambda _: None)
    return probs, [decode(k) for k in range(len(probs))]


@dataclass
class LearnerResult:
    target: Concept
    success: float
    undefined_mass: float
    T: int
    hypotheses: dict[str, float] = field(default_factory=dict)


@dataclass
class Certification:
    results: list[LearnerResult]
    threshold: float
    T: int

    @property
    def min_success(self) -> float:
        return min(r.success for r in self.results)

    @property
    def verdict(self) -> bool:
        return self.min_success >= float(self.threshold) - 1e-12

    def to_json(self, class_name: str = "", bounds: dict | None = None) -> dict:
        return {
            "class": class_name,
            "T": self.T,
            "per_target_success": {r.target.to_hex(): r.success for r in self.results},
            "min_success": self.min_success,
            "verdict": "pass" if self.verdict else "fail",
            "bounds": bounds or {},
        }


def certify_learner(net: QueryNetwork, cls: ConceptClass, threshold: float = DEFAULT_THRESHOLD) -> Certification:
    """Exact per-target success probabilities of ``net`` over every c in ``cls``.

    Outcomes the decoder cannot name count as failure mass.
    """
    results = []
    for c in cls:
        probs, hyps = outcome_hypotheses(net, c)
        success = undefined = 0.0
        declared: dict[str, float] = {}
        for p, h in zip(probs, hyps):
            if p == 0:
                continue
            if h is None:
                undefined += p
                continue
            declared[h.to_hex()] = declared.get(h.to_hex(), 0.0) + p
            if h == c:
                success += p
        results.append(LearnerResult(c, min(1.0, success), undefined, net.T, declared))
    return Certification(results, threshold, net.T)


def qex_sample(c: Concept, dist: Distribution, size: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Measure ``size`` fresh QEX(c, D) states on all n+1 qubits.

    The copies are independent and identical, so measuring each one is the
    same as drawing from the single-copy measurement distribution.
    """
    state = prepare_qex(c, dist, c.n + 1)
    outcomes = measure_distribution(state, range(c.n + 1)).sample(size, rng)
    return [(int(z >> 1), int(z & 1)) for z in outcomes]


def qex_sampling_learner(cls: ConceptClass, c: Concept, dist: Distribution, params: PacParams,
                         seed: int | np.random.Generator = 0) -> Concept:
    """PAC learn from measured QEX states, then pick the first consistent concept."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    m = pac_sample_size(params, vc_dimension(cls)[0])
    return consistent_hypothesis(cls, qex_sample(c, dist, m, rng))
