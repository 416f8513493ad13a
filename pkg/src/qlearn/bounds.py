"""Lower-bound machinery: polynomial method, diagonal dominance, GV codes, bound formulas."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from qlearn.classical import PacParams, exact_upper_bound, pac_sample_size
from qlearn.concepts import CapExceeded, Concept, ConceptClass, gamma_hat, vc_dimension
from qlearn.learners import outcome_hypotheses
from qlearn.quantum import QueryNetwork, run_network

POLY_MAX_N = 8
GERSHGORIN_MAX = 64
GV_MAX_D = 24
RANK_TOL = 1e-9


# ------------------------------------------------------ polynomial method ---

@dataclass
class MultilinearPolynomial:
    """Real multilinear polynomial in X_0..X_{N-1}.

    ``coefficients[mask]`` is the coefficient of the monomial prod_{j in mask} X_j,
    with bit j of ``mask`` standing for variable X_j.
    """

    N: int
    coefficients: np.ndarray

    def __call__(self, X: Iterable[int]) -> float:
        mask = 0
        for j, v in enumerate(X):
            mask |= (int(v) & 1) << j
        return float(self.values()[mask])

    def values(self) -> np.ndarray:
        """Evaluation at every 0/1 point (zeta transform over the subset lattice)."""
        f = self.coefficients.astype(float).copy()
        for j in range(self.N):
            bit = 1 << j
            hi = np.arange(len(f)) & bit != 0
            f[hi] += f[np.flatnonzero(hi) ^ bit]
        return f

    def monomial_degrees(self) -> np.ndarray:
        return np.bitwise_count(np.arange(len(self.coefficients), dtype=np.uint64)).astype(int)

    def degree(self, tol: float = 1e-7) -> int:
        big = np.abs(self.coefficients) > tol
        return int(self.monomial_degrees()[big].max()) if big.any() else 0

    def max_coefficient_above(self, deg: int) -> float:
        high = self.monomial_degrees() > deg
        return float(np.abs(self.coefficients[high]).max()) if high.any() else 0.0

    def terms(self, tol: float = 1e-9) -> dict[tuple[int, ...], float]:
        return {
            tuple(j for j in range(self.N) if mask >> j & 1): float(c)
            for mask, c in enumerate(self.coefficients)
            if abs(c) > tol
        }


def mobius_inversion(values: np.ndarray, N: int) -> np.ndarray:
    """coef(S) = sum_{R subset S} (-1)^{|S \\ R|} f(1_R), in place over the subset lattice."""
    f = np.asarray(values, dtype=float).copy()
    if f.shape != (1 << N,):
        raise ValueError("need one value per subset")
    for j in range(N):
        bit = 1 << j
        hi = np.flatnonzero(np.arange(len(f)) & bit)
        f[hi] -= f[hi ^ bit]
    return f


def _oracle_tables(n: int) -> list[Concept]:
    N = 1 << n
    return [Concept(n, [(mask >> j) & 1 for j in range(N)]) for mask in range(1 << N)]


def acceptance_probabilities(net: QueryNetwork, outcome_set: Iterable[int | str]) -> np.ndarray:
    """Pr[final basis state in B] for every black box X, indexed by the mask of X."""
    n = net.n
    if (1 << n) > POLY_MAX_N:
        raise CapExceeded(f"N = {1 << n} exceeds the polynomial-method cap of {POLY_MAX_N}")
    B = np.array(sorted(int(z, 2) if isinstance(z, str) else int(z) for z in outcome_set), dtype=np.int64)
    out = np.empty(1 << (1 << n))
    for mask, c in enumerate(_oracle_tables(n)):
        probs = run_network(net, c).final.probabilities()
        out[mask] = probs[B].sum() if len(B) else 0.0
    return out


def acceptance_polynomial(net: QueryNetwork, outcome_set: Iterable[int | str]) -> MultilinearPolynomial:
    """Exact multilinear interpolant of the acceptance probability in the oracle's truth table."""
    N = 1 << net.n
    return MultilinearPolynomial(N, mobius_inversion(acceptance_probabilities(net, outcome_set), N))


def basis_states_where(net: QueryNetwork, qubit: int, value: int) -> list[int]:
    """All m-bit basis indices with ``qubit`` equal to ``value``."""
    idx = np.arange(1 << net.m)
    return [int(z) for z in idx[((idx >> (net.m - 1 - qubit)) & 1) == value]]


# -------------------------------------------------------- success matrix ---

@dataclass
class SuccessMatrix:
    L: np.ndarray  # L[i, j] = Pr[output c_i | oracle c_j]

    @property
    def transpose_dominant(self) -> bool:
        return is_diagonally_dominant(self.L.T)

    def column_sums(self) -> np.ndarray:
        return self.L.sum(axis=0)


def success_matrix(net: QueryNetwork, cls: ConceptClass) -> SuccessMatrix:
    lookup = {c.key(): i for i, c in enumerate(cls)}
    k = len(cls)
    L = np.zeros((k, k))
    for j, c in enumerate(cls):
        probs, hyps = outcome_hypotheses(net, c)
        for p, h in zip(probs, hyps):
            if h is not None and h.key() in lookup:
                L[lookup[h.key()], j] += p
    return SuccessMatrix(L)


# ------------------------------------------------------------ Gershgorin ---

def is_diagonally_dominant(A: np.ndarray) -> bool:
    A = np.asarray(A)
    off = np.abs(A).sum(axis=1) - np.abs(np.diagonal(A))
    return bool(np.all(np.abs(np.diagonal(A)) > off))


def pivoted_rank(A: np.ndarray, tol: float = RANK_TOL) -> int:
    """Rank by Gaussian elimination with complete pivoting."""
    M = np.array(A, dtype=complex if np.iscomplexobj(A) else float)
    rows, cols = M.shape
    rank = 0
    for r in range(min(rows, cols)):
        sub = np.abs(M[r:, r:])
        i, j = np.unravel_index(np.argmax(sub), sub.shape)
        if sub[i, j] <= tol:
            break
        i, j = i + r, j + r
        M[[r, i]] = M[[i, r]]
        M[:, [r, j]] = M[:, [j, r]]
        M[r + 1:] -= np.outer(M[r + 1:, r] / M[r, r], M[r])
        rank += 1
    return rank


@dataclass
class GershgorinReport:
    dominant: bool
    rank_full: bool
    rank: int
    disks: list[tuple[complex, float]]
    eigenvalues: np.ndarray
    max_disk_excess: float  # how far the worst eigenvalue sits outside the disk union

    @property
    def eigenvalues_in_disks(self) -> bool:
        return self.max_disk_excess <= 1e-6


def gershgorin_disks(A: np.ndarray) -> list[tuple[complex, float]]:
    A = np.asarray(A)
    radii = np.abs(A).sum(axis=1) - np.abs(np.diagonal(A))
    return [(complex(A[i, i]), float(radii[i])) for i in range(len(A))]


def diagonal_dominance_full_rank(A: np.ndarray) -> GershgorinReport:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    if len(A) > GERSHGORIN_MAX:
        raise CapExceeded(f"size {len(A)} exceeds {GERSHGORIN_MAX}")
    disks = gershgorin_disks(A)
    eig = np.linalg.eigvals(A)
    centers = np.array([c for c, _ in disks])
    radii = np.array([r for _, r in disks])
    excess = np.abs(eig[:, None] - centers[None, :]) - radii[None, :]
    worst = float(excess.min(axis=1).max()) if len(eig) else 0.0
    rank = pivoted_rank(A)
    report = GershgorinReport(is_diagonally_dominant(A), rank == len(A), rank, disks, eig, max(worst, 0.0))
    if report.dominant and not report.rank_full:
        raise AssertionError("diagonally dominant matrix came out rank deficient")
    return report


# ---------------------------------------------------------- GV codebook ---

def binary_entropy(p: float) -> float:
    """H(p) in bits, with H(0) = H(1) = 0."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    if p in (0, 1):
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


@dataclass
class Codebook:
    d: int
    codewords: list[int]

    @property
    def min_distance(self) -> int:
        return min_pairwise_distance(self.codewords)

    def strings(self) -> list[str]:
        return [format(w, f"0{self.d}b") for w in self.codewords]


def min_pairwise_distance(words: list[int]) -> int:
    if len(words) < 2:
        return math.inf
    w = np.array(words, dtype=np.uint64)
    best = math.inf
    for start in range(0, len(w), 512):
        block = w[start:start + 512]
        dist = np.bitwise_count(block[:, None] ^ w[None, :]).astype(np.int64)
        rows = np.arange(len(block))
        dist[rows, rows + start] = np.iinfo(np.int64).max
        best = min(best, int(dist.min()))
    return best


def hamming_ball(d: int, radius: int) -> np.ndarray:
    """Every d-bit word of weight <= radius."""
    words = np.arange(1 << d, dtype=np.uint64) if d <= 20 else None
    if words is not None:
        return words[np.bitwise_count(words) <= radius].astype(np.int64)
    out = [0]
    from itertools import combinations
    for r in range(1, radius + 1):
        out.extend(sum(1 << i for i in pos) for pos in combinations(range(d), r))
    return np.array(out, dtype=np.int64)


def gv_codebook(d: int) -> Codebook:
    """Lexicographic greedy code with pairwise distance >= ceil(d/4).

    A word is kept when no earlier codeword lies within distance ceil(d/4) - 1;
    the covered words are marked in a bitmap so each scan is linear.
    """
    if not 1 <= d <= GV_MAX_D:
        raise CapExceeded(f"d = {d} outside 1..{GV_MAX_D}")
    r = math.ceil(d / 4)
    ball = hamming_ball(d, r - 1)
    covered = np.zeros(1 << d, dtype=bool)
    words: list[int] = []
    pos, chunk = 0, 4096
    while pos < len(covered):
        free = np.flatnonzero(~covered[pos:pos + chunk])
        if len(free) == 0:
            pos += chunk
            continue
        w = pos + int(free[0])
        words.append(w)
        covered[ball ^ w] = True
        pos = w + 1
    return Codebook(d, words)


@dataclass
class GvChain:
    d: int
    ratio: float  # 2^d / sum_{i < d/4} binom(d, i)
    ratio_closed: float  # 2^d / sum_{i <= d/4} binom(d, i)
    entropy_bound: float  # 2^{d(1 - H(1/4))}
    target: float  # 2^{d/6}

    @property
    def holds(self) -> bool:
        chain = self.ratio >= self.ratio_closed >= self.entropy_bound * (1 - 1e-12)
        return chain and (self.entropy_bound > self.target or self.d == 0)


def gv_chain(d: int) -> GvChain:
    below = sum(math.comb(d, i) for i in range(d + 1) if i < d / 4)
    upto = sum(math.comb(d, i) for i in range(d + 1) if i <= d / 4)
    return GvChain(d, 2**d / max(below, 1), 2**d / upto, 2 ** (d * (1 - binary_entropy(0.25))), 2 ** (d / 6))


# -------------------------------------------------------- bound reports ---

@dataclass
class ClassicalBounds:
    similarity: float  # 1/(2 gamma_hat) - 1
    size: float  # log2|C| - 1
    upper: int  # ceil(log2|C| / -log2(1 - gamma_hat))
    vc: int  # d
    pac_upper: int | None  # m(eps, delta, d)

    @property
    def exact_lower(self) -> float:
        return max(self.similarity, self.size, 0.0)


@dataclass
class QuantumBounds:
    similarity: float  # (1/64) sqrt(1/gamma_hat)
    size: float  # log2|C| / (2n)
    vc: float  # d / (12n)

    @property
    def exact_lower(self) -> float:
        return max(self.similarity, self.size)


@dataclass
class BoundReport:
    size: int
    n: int
    gamma_hat: Fraction
    vc_dim: int
    classical: ClassicalBounds
    quantum: QuantumBounds

    def to_json(self) -> dict:
        return {
            "size": self.size,
            "n": self.n,
            "gamma_hat": str(self.gamma_hat),
            "vc_dim": self.vc_dim,
            "classical": asdict(self.classical),
            "quantum": asdict(self.quantum),
        }

    def rows(self, class_name: str) -> list[tuple[str, str, str, float]]:
        """(class, model, bound, value) rows for the CSV output."""
        out = []
        for model, part in (("classical", self.classical), ("quantum", self.quantum)):
            for key, val in asdict(part).items():
                if val is not None:
                    out.append((class_name, model, key, float(val)))
        return out


def bound_report(cls: ConceptClass, params: PacParams | None = None) -> BoundReport:
    """Every bound for ``cls`` with the explicit constants of the proofs."""
    g = gamma_hat(cls).gamma_hat
    d, _ = vc_dimension(cls)
    size, n = len(cls), cls.n
    log_c = math.log2(size)
    classical = ClassicalBounds(
        similarity=max(0.0, 1 / (2 * float(g)) - 1),
        size=max(0.0, log_c - 1),
        upper=exact_upper_bound(size, g),
        vc=d,
        pac_upper=pac_sample_size(params, d) if params else None,
    )
    quantum = QuantumBounds(
        similarity=math.sqrt(1 / float(g)) / 64,
        size=log_c / (2 * n),
        vc=d / (12 * n),
    )
    return BoundReport(size, n, g, d, classical, quantum)
