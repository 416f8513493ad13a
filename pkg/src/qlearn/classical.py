"""Classical membership/example oracles, query adversaries and learners."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from qlearn.concepts import (
    Concept,
    ConceptClass,
    Distribution,
    GammaStats,
    bits,
    gamma_hat,
    index_of,
    vc_dimension,
)


class ProtocolViolation(RuntimeError):
    """The oracle's answers are inconsistent with every concept in the class."""


class AdversaryConceded(RuntimeError):
    """The adversary's live set has dropped below two concepts."""


HONEST = "honest"
SIMILARITY = "adversary_similarity"
MAJORITY = "adversary_majority"


@dataclass
class MembershipOracle:
    """MQ_c, or an adversary that answers to keep many concepts alive.

    Adversaries track ``live`` as indices into ``universe``.  The similarity
    adversary ranks answers by the fixed witness subset it was seeded with;
    the majority adversary ranks them by the current live set.
    """

    mode: str
    target: Concept | None = None
    universe: ConceptClass | None = None
    live: list[int] = field(default_factory=list)
    query_count: int = 0
    history: list[tuple[int, int]] = field(default_factory=list)
    conceded_at: int | None = None  # queries answered when the live set fell below 2

    @classmethod
    def honest(cls, target: Concept) -> MembershipOracle:
        return cls(HONEST, target=target)

    @classmethod
    def similarity_adversary(cls, live_set: ConceptClass) -> MembershipOracle:
        return cls(SIMILARITY, universe=live_set, live=list(range(len(live_set))))

    @classmethod
    def majority_adversary(cls, live_set: ConceptClass) -> MembershipOracle:
        return cls(MAJORITY, universe=live_set, live=list(range(len(live_set))))

    @property
    def live_set(self) -> ConceptClass | None:
        if self.universe is None:
            return None
        return self.universe.subset(self.live)

    @property
    def conceded(self) -> bool:
        return self.mode != HONEST and len(self.live) < 2

    @property
    def forced(self) -> int:
        """Queries the adversary answered before conceding (all of them if it has not)."""
        return self.query_count if self.conceded_at is None else self.conceded_at

    def query(self, a: str | int) -> int:
        """Answer a membership query.

        After conceding, an adversary keeps answering as its last live concept
        so that a learner can still finish.
        """
        if self.mode == HONEST or self.conceded:
            target = self.target if self.mode == HONEST else self.universe[self.live[0]]
            b = target(a)
            self.query_count += 1
            self.history.append((index_of(a, target.n), b))
            return b
        if self.mode == SIMILARITY:
            b = answer_similarity_adversary(self, a)
        elif self.mode == MAJORITY:
            b = answer_majority_adversary(self, a)
        else:
            raise ValueError(f"unknown oracle mode {self.mode!r}")
        if self.conceded:
            self.conceded_at = self.query_count
        return b


def _adversary_answer(oracle: MembershipOracle, a: str | int, preferred: int) -> int:
    x = index_of(a, oracle.universe.n)
    labels = oracle.universe.matrix[oracle.live, x]
    b = preferred if np.any(labels == preferred) else 1 - preferred
    oracle.live = [i for i, lab in zip(oracle.live, labels) if lab == b]
    oracle.query_count += 1
    oracle.history.append((x, b))
    return b


def _require_live(oracle: MembershipOracle, mode: str) -> None:
    if oracle.mode != mode:
        raise ValueError(f"oracle is in {oracle.mode} mode, not {mode}")
    if len(oracle.live) < 2:
        raise AdversaryConceded(f"live set has {len(oracle.live)} concept(s); the adversary concedes")


def answer_similarity_adversary(oracle: MembershipOracle, a: str | int) -> int:
    """Answer the bit that the larger share of the seed subset C' agrees with.

    Ties go to 0.  If no live concept carries that bit the other bit is given,
    which eliminates nothing; either way at most a gamma-hat fraction of C'
    is removed per answer.
    """
    _require_live(oracle, SIMILARITY)
    x = index_of(a, oracle.universe.n)
    ones = int(oracle.universe.matrix[:, x].sum())
    preferred = 1 if 2 * ones > len(oracle.universe) else 0
    return _adversary_answer(oracle, x, preferred)


def answer_majority_adversary(oracle: MembershipOracle, a: str | int) -> int:
    """Answer the label held by at least half of the live set (ties go to 0)."""
    _require_live(oracle, MAJORITY)
    x = index_of(a, oracle.universe.n)
    ones = int(oracle.universe.matrix[oracle.live, x].sum())
    preferred = 1 if 2 * ones > len(oracle.live) else 0
    return _adversary_answer(oracle, x, preferred)


def similarity_oracle_for(cls: ConceptClass, stats: GammaStats | None = None) -> MembershipOracle:
    stats = stats or gamma_hat(cls)
    return MembershipOracle.similarity_adversary(cls.subset(stats.witness_subset))


# --------------------------------------------------------- exact learner ---

def best_split_query(M: np.ndarray, version: np.ndarray) -> int:
    """Index a maximising min_b |C'_<a,b>| over the version space (first on ties)."""
    ones = M[version].sum(axis=0, dtype=np.int64)
    return int(np.argmax(np.minimum(ones, len(version) - ones)))


def greedy_exact_learner(cls: ConceptClass, oracle: MembershipOracle) -> tuple[Concept, int]:
    """Query the most-splitting string of the version space until one concept remains."""
    M = cls.matrix
    version = np.arange(len(cls))
    queries = 0
    while len(version) > 1:
        a = best_split_query(M, version)
        b = oracle.query(bits(a, cls.n))
        queries += 1
        version = version[M[version, a] == b]
        if len(version) == 0:
            raise ProtocolViolation(f"no concept in the class agrees with answer {b} at {bits(a, cls.n)}")
    return cls[int(version[0])], queries


def random_query_strategy(oracle: MembershipOracle, n: int, rng: np.random.Generator, max_queries: int = 100_000) -> int:
    """Ask uniformly random strings until the adversary's live set is a single concept."""
    queries = 0
    while len(oracle.live) >= 2:
        if queries >= max_queries:
            raise RuntimeError("random strategy did not isolate a concept")
        oracle.query(int(rng.integers(1 << n)))
        queries += 1
    return queries


def exact_upper_bound(size: int, gamma: float) -> int:
    """ceil(log2|C| / -log2(1 - gamma_hat)): greedy learner query budget."""
    if size < 2:
        return 0
    return math.ceil(math.log2(size) / -math.log2(1 - float(gamma)))


# ----------------------------------------------------------------- PAC ---

@dataclass(frozen=True)
class PacParams:
    epsilon: float
    delta: float

    def __post_init__(self) -> None:
        for name in ("epsilon", "delta"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ValueError(f"{name} must lie strictly inside (0, 1), got {v}")


def pac_sample_size(params: PacParams, d: int) -> int:
    """m = ceil((4/eps) ln(2/delta) + (8d/eps) ln(13/eps)), at least 1."""
    if d < 0:
        raise ValueError("VC dimension must be non-negative")
    eps, delta = params.epsilon, params.delta
    m = (4 / eps) * math.log(2 / delta) + (8 * d / eps) * math.log(13 / eps)
    return max(1, math.ceil(m))


@dataclass
class ExampleOracle:
    """EX(c, D): each draw is (x, c(x)) with x ~ D."""

    target: Concept
    dist: Distribution
    rng_seed: int = 0
    draw_count: int = 0
    rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.dist.n != self.target.n:
            raise ValueError("distribution and target disagree on n")
        self.rng = np.random.default_rng(self.rng_seed)

    def draw(self) -> tuple[int, int]:
        return self.draw_many(1)[0]

    def draw_many(self, size: int) -> list[tuple[int, int]]:
        xs = self.dist.sample(size, self.rng)
        self.draw_count += size
        return [(int(x), int(self.target.table[x])) for x in xs]


def consistent_hypothesis(cls: ConceptClass, sample: Iterable[tuple[int, int]]) -> Concept:
    """First concept in class order that agrees with every labeled example."""
    sample = list(sample)
    if not sample:
        return cls[0]
    xs = np.array([x for x, _ in sample])
    ys = np.array([y for _, y in sample])
    ok = np.all(cls.matrix[:, xs] == ys, axis=1)
    hits = np.flatnonzero(ok)
    if len(hits) == 0:
        raise ProtocolViolation("no concept in the class is consistent with the sample")
    return cls[int(hits[0])]


def pac_consistent_learner(cls: ConceptClass, oracle: ExampleOracle, params: PacParams, d: int | None = None) -> Concept:
    """Draw m(eps, delta, VC-dim) examples and return the first consistent concept."""
    d = vc_dimension(cls)[0] if d is None else d
    return consistent_hypothesis(cls, oracle.draw_many(pac_sample_size(params, d)))


def empirical_error(h: Concept, c: Concept, dist: Distribution) -> float:
    """Exact Pr_{x~D}[h(x) != c(x)]."""
    if not h.n == c.n == dist.n:
        raise ValueError("dimension mismatch")
    return float(dist.weights[h.table != c.table].sum())


def hard_pac_distribution(cls: ConceptClass) -> Distribution:
    """Uniform on a maximum shattered set; a point mass on 0^n when d = 0."""
    d, witness = vc_dimension(cls)
    if d == 0:
        return Distribution.point_mass(cls.n, 0)
    return Distribution.uniform_on(cls.n, witness)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, trial]))


def pac_success_rate(cls: ConceptClass, target: Concept, dist: Distribution, params: PacParams, trials: int,
                     seed: int, learner: Callable[..., Concept]) -> float:
    """Fraction of seeded trials in which ``learner`` returns an eps-approximator.

    ``learner(cls, target, dist, params, rng)`` returns a hypothesis.
    """
    wins = 0
    for t in range(trials):
        h = learner(cls, target, dist, params, trial_rng(seed, t))
        wins += empirical_error(h, target, dist) <= params.epsilon
    return wins / trials


def classical_pac_run(cls: ConceptClass, target: Concept, dist: Distribution, params: PacParams,
                      rng: np.random.Generator, d: int | None = None) -> Concept:
    oracle = ExampleOracle(target, dist)
    oracle.rng = rng
    return pac_consistent_learner(cls, oracle, params, d)


def exact_run_record(cls_name: str, target: Concept | None, mode: str, queries: int, hypothesis: Concept,
                     success: bool, seed: int) -> dict:
    return {
        "target": target.to_hex() if target is not None else None,
        "class": cls_name,
        "mode": mode,
        "queries": queries,
        "hypothesis": hypothesis.to_hex(),
        "success": bool(success),
        "seed": seed,
    }


def sample_counts(sample: Sequence[tuple[int, int]], n: int) -> np.ndarray:
    return np.bincount([x for x, _ in sample], minlength=1 << n)
