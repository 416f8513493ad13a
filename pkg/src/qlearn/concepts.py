"""Truth-table concepts, concept classes and their combinatorics.

A concept over ``{0,1}^n`` is stored as its length ``N = 2**n`` truth table;
entry ``i`` is the label of the big-endian ``n``-bit string for ``i``. The same
convention fixes the query-register layout in :mod:`qlearn.quantum`.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

MAX_N = 16
MAX_TABLE_CELLS = 1 << 24  # |C| * 2^n stored bits
GAMMA_HAT_CAP = 20
VC_DOMAIN_CAP = 256


class CapExceeded(ValueError):
    """A brute-force computation was asked to go past its enumeration cap."""


def bits(i: int, n: int) -> str:
    return format(i, f"0{n}b") if n else ""


def index_of(x: str | int, n: int) -> int:
    """Index of the n-bit string ``x`` (strings are big-endian; ints pass through)."""
    if isinstance(x, (int, np.integer)):
        if not 0 <= x < (1 << n):
            raise ValueError(f"index {x} out of range for n={n}")
        return int(x)
    if len(x) != n or set(x) - {"0", "1"}:
        raise ValueError(f"{x!r} is not a {n}-bit string")
    return int(x, 2)


@dataclass(frozen=True, eq=False)
class Concept:
    n: int
    table: np.ndarray

    def __post_init__(self) -> None:
        table = np.asarray(self.table, dtype=np.uint8).copy()
        if self.n < 1:
            raise ValueError("n must be positive")
        if table.shape != (1 << self.n,):
            raise ValueError(f"table must have length 2^{self.n}, got shape {table.shape}")
        if np.any(table > 1):
            raise ValueError("table entries must be 0 or 1")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    @classmethod
    def from_function(cls, n: int, f) -> Concept:
        return cls(n, [int(f(bits(i, n))) & 1 for i in range(1 << n)])

    @classmethod
    def zero(cls, n: int) -> Concept:
        return cls(n, np.zeros(1 << n, dtype=np.uint8))

    def __call__(self, x: str | int) -> int:
        return int(self.table[index_of(x, self.n)])

    @property
    def N(self) -> int:
        return 1 << self.n

    def complement(self) -> Concept:
        return Concept(self.n, 1 - self.table)

    def key(self) -> bytes:
        return self.table.tobytes()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Concept):
            return NotImplemented
        return self.n == other.n and self.key() == other.key()

    def __hash__(self) -> int:
        return hash((self.n, self.key()))

    def to_hex(self) -> str:
        """Hex encoding with table index 0 as the most significant bit."""
        value = int("".join(map(str, self.table)), 2)
        return format(value, f"0{math.ceil(self.N / 4)}x")

    @classmethod
    def from_hex(cls, n: int, text: str) -> Concept:
        N = 1 << n
        value = int(text, 16)
        if value >> N:
            raise ValueError(f"hex table {text!r} has more than {N} bits")
        return cls(n, [int(ch) for ch in format(value, f"0{N}b")])

    def __repr__(self) -> str:
        return f"Concept(n={self.n}, table={''.join(map(str, self.table))})"


@dataclass(frozen=True)
class ConceptClass:
    n: int
    concepts: tuple[Concept, ...]
    kind: str = field(default="explicit", compare=False)

    def __post_init__(self) -> None:
        concepts = tuple(self.concepts)
        object.__setattr__(self, "concepts", concepts)
        if not concepts:
            raise ValueError("a concept class must be non-empty")
        if any(c.n != self.n for c in concepts):
            raise ValueError("all concepts must share n")
        if len({c.key() for c in concepts}) != len(concepts):
            raise ValueError("duplicate concepts in class")

    def __len__(self) -> int:
        return len(self.concepts)

    def __iter__(self) -> Iterator[Concept]:
        return iter(self.concepts)

    def __getitem__(self, i: int) -> Concept:
        return self.concepts[i]

    @property
    def N(self) -> int:
        return 1 << self.n

    @cached_property
    def matrix(self) -> np.ndarray:
        """|C| x N label matrix (row i is the truth table of concept i)."""
        m = np.stack([c.table for c in self.concepts]).astype(np.uint8)
        m.setflags(write=False)
        return m

    def index(self, concept: Concept) -> int:
        for i, c in enumerate(self.concepts):
            if c == concept:
                return i
        raise ValueError("concept not in class")

    def subset(self, indices: Iterable[int]) -> ConceptClass:
        return ConceptClass(self.n, tuple(self.concepts[i] for i in indices))


@dataclass(frozen=True)
class GammaStats:
    gamma_hat: Fraction
    witness_subset: tuple[int, ...]
    witness_query: str


@dataclass(frozen=True)
class DifferenceMatrix:
    rows: np.ndarray
    typical: Concept

    @property
    def column_sums(self) -> np.ndarray:
        return self.rows.sum(axis=0)

    @property
    def l1_norm(self) -> int:
        """Max column sum of ones (the induced L1 matrix norm of a 0/1 matrix)."""
        return int(self.column_sums.max()) if self.rows.size else 0


@dataclass(frozen=True, eq=False)
class Distribution:
    n: int
    weights: np.ndarray

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float).copy()
        if w.shape != (1 << self.n,):
            raise ValueError(f"weights must have length 2^{self.n}")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {w.sum()!r}, not 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, n: int) -> Distribution:
        return cls(n, np.full(1 << n, 1.0 / (1 << n)))

    @classmethod
    def uniform_on(cls, n: int, points: Iterable[str | int]) -> Distribution:
        idx = sorted({index_of(x, n) for x in points})
        if not idx:
            raise ValueError("support must be non-empty")
        w = np.zeros(1 << n)
        w[idx] = 1.0 / len(idx)
        return cls(n, w)

    @classmethod
    def point_mass(cls, n: int, x: str | int) -> Distribution:
        return cls.uniform_on(n, [x])

    def __getitem__(self, x: str | int) -> float:
        return float(self.weights[index_of(x, self.n)])

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.weights)

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        """Draw ``size`` indices; ``rng`` carries the seed."""
        return rng.choice(1 << self.n, size=size, p=self.weights)


# ---------------------------------------------------------------- gamma ---

def gamma_fraction(class_subset: ConceptClass, a: str | int, b: int) -> Fraction:
    """Fraction of ``class_subset`` that labels ``a`` with ``b``."""
    x = index_of(a, class_subset.n)
    if b not in (0, 1):
        raise ValueError("b must be a bit")
    hits = int(np.count_nonzero(class_subset.matrix[:, x] == b))
    return Fraction(hits, len(class_subset))


def gamma_of_subset(class_subset: ConceptClass) -> tuple[Fraction, str]:
    """gamma^{C'} and the first query string attaining it."""
    k = len(class_subset)
    ones = class_subset.matrix.sum(axis=0, dtype=np.int64)
    split = np.minimum(ones, k - ones)
    a = int(np.argmax(split))
    return Fraction(int(split[a]), k), bits(a, class_subset.n)


def _subset_masks(size: int, start: int, stop: int) -> np.ndarray:
    masks = np.arange(start, stop, dtype=np.int64)
    return ((masks[:, None] >> np.arange(size)) & 1).astype(np.int64)


def gamma_hat(cls: ConceptClass, cap: int = GAMMA_HAT_CAP) -> GammaStats:
    """Exact gamma-hat by brute force over every subset of size >= 2.

    Each subset C' scores max_a min_b |C'_<a,b>| / |C'|.  Scores are compared
    exactly as integers scaled by lcm(1..|C|).  Ties go to the subset whose
    sorted index tuple is lexicographically first, then to the first query.
    """
    k = len(cls)
    if k < 2:
        raise ValueError("gamma_hat needs at least two concepts")
    if k > cap:
        raise CapExceeded(f"|C| = {k} exceeds the gamma_hat cap of {cap}; use bound estimates instead")
    X = cls.matrix.astype(np.int64)
    scale = math.lcm(*range(1, k + 1))
    best_val = None
    best_masks: list[int] = []
    chunk = max(1, (1 << 22) // max(1, cls.N * k))
    total = 1 << k
    for start in range(0, total, chunk):
        stop = min(total, start + chunk)
        sel = _subset_masks(k, start, stop)
        sizes = sel.sum(axis=1)
        keep = sizes >= 2
        if not keep.any():
            continue
        sel, sizes = sel[keep], sizes[keep]
        ones = sel @ X
        split = np.minimum(ones, sizes[:, None] - ones).max(axis=1)
        vals = split * (scale // sizes)
        lo = int(vals.min())
        if best_val is None or lo < best_val:
            best_val, best_masks = lo, []
        if lo == best_val:
            best_masks.extend(int(m) for m in np.arange(start, stop)[keep][vals == lo])
    subsets = [tuple(i for i in range(k) if m >> i & 1) for m in best_masks]
    witness = min(subsets)
    value, query = gamma_of_subset(cls.subset(witness))
    assert value == Fraction(best_val, scale)
    return GammaStats(value, witness, query)


def typical_concept(class_subset: ConceptClass) -> Concept:
    """Pointwise majority vote; exact ties resolve to 0."""
    ones = class_subset.matrix.sum(axis=0, dtype=np.int64)
    return Concept(class_subset.n, (2 * ones > len(class_subset)).astype(np.uint8))


def difference_matrix(class_subset: ConceptClass) -> DifferenceMatrix:
    typical = typical_concept(class_subset)
    rows = (class_subset.matrix != typical.table[None, :]).astype(np.uint8)
    return DifferenceMatrix(rows, typical)


# ------------------------------------------------------------------- VC ---

def dichotomy_count(cls: ConceptClass, S: Iterable[str | int]) -> int:
    """|Pi_C(S)|: number of distinct restrictions of class members to S."""
    idx = sorted({index_of(x, cls.n) for x in S})
    if not idx:
        return 1
    return len(np.unique(cls.matrix[:, idx], axis=0))


def _restriction_codes(codes: np.ndarray, column: np.ndarray) -> np.ndarray:
    return codes * 2 + column


def _find_shattered(M: np.ndarray, size: int) -> tuple[int, ...] | None:
    """Depth-first search for a shattered set of ``size`` columns.

    Shattering is hereditary, so every prefix of a candidate must itself be
    shattered; that prunes the search.
    """
    rows, N = M.shape
    stack: list[tuple[tuple[int, ...], np.ndarray]] = [((), np.zeros(rows, dtype=np.int64))]
    while stack:
        chosen, codes = stack.pop()
        if len(chosen) == size:
            return chosen
        start = chosen[-1] + 1 if chosen else 0
        need = size - len(chosen)
        # push in reverse so the lexicographically first set is found first
        for x in range(N - need, start - 1, -1):
            new = _restriction_codes(codes, M[:, x])
            if len(np.unique(new)) == 1 << (len(chosen) + 1):
                stack.append((chosen + (x,), new))
    return None


def vc_dimension(cls: ConceptClass) -> tuple[int, tuple[str, ...]]:
    """Exact VC dimension and one maximum shattered set (as bit strings)."""
    if cls.N > VC_DOMAIN_CAP:
        raise CapExceeded(f"N = {cls.N} exceeds the VC enumeration cap of {VC_DOMAIN_CAP}")
    M = cls.matrix.astype(np.int64)
    best: tuple[int, ...] = ()
    limit = int(math.floor(math.log2(len(cls))))
    for size in range(1, limit + 1):
        found = _find_shattered(M, size)
        if found is None:
            break
        best = found
    return len(best), tuple(bits(x, cls.n) for x in best)


# ------------------------------------------------------------- builders ---

def _check_size(n: int, count: int) -> None:
    if not 1 <= n <= MAX_N:
        raise ValueError(f"n = {n} out of range 1..{MAX_N}")
    if count * (1 << n) > MAX_TABLE_CELLS:
        raise ValueError(f"n = {n} out of range: {count} concepts x 2^{n} entries exceeds storage cap")


def _domain(n: int) -> np.ndarray:
    """N x n matrix of the big-endian bits of every domain string."""
    return ((np.arange(1 << n)[:, None] >> np.arange(n - 1, -1, -1)) & 1).astype(np.int64)


def parity_class(n: int) -> ConceptClass:
    """All 2^n parities c_a(x) = a.x mod 2, listed in order of a."""
    _check_size(n, 1 << n)
    D = _domain(n)
    tables = (D @ D.T) % 2  # row a, column x
    return ConceptClass(n, tuple(Concept(n, row) for row in tables), kind="parity")


def point_functions_plus_zero(n: int) -> ConceptClass:
    """The all-zero concept followed by the point functions e_x in index order."""
    N = 1 << n
    _check_size(n, N + 1)
    eye = np.eye(N, dtype=np.uint8)
    concepts = (Concept.zero(n),) + tuple(Concept(n, row) for row in eye)
    return ConceptClass(n, concepts, kind="points_plus_zero")


def all_functions(n: int) -> ConceptClass:
    """Every Boolean function on n bits, ordered by the integer value of the table."""
    if n > 4:
        raise ValueError(f"n = {n} out of range for all_functions (2^2^n concepts)")
    _check_size(n, 1 << (1 << n))
    N = 1 << n
    tables = (np.arange(1 << N)[:, None] >> np.arange(N - 1, -1, -1)) & 1
    return ConceptClass(n, tuple(Concept(n, row) for row in tables), kind="all")


def conjunctions(n: int) -> ConceptClass:
    """Conjunctions of literals (each variable positive, negated or absent) plus the empty concept."""
    _check_size(n, 3**n + 1)
    D = _domain(n)
    seen: dict[bytes, Concept] = {}
    for signs in itertools.product((0, 1, -1), repeat=n):
        keep = np.ones(1 << n, dtype=bool)
        for var, s in enumerate(signs):
            if s == 1:
                keep &= D[:, var] == 1
            elif s == -1:
                keep &= D[:, var] == 0
        c = Concept(n, keep.astype(np.uint8))
        seen.setdefault(c.key(), c)
    zero = Concept.zero(n)
    seen.setdefault(zero.key(), zero)
    return ConceptClass(n, tuple(seen.values()), kind="conjunctions")


def from_tables(tables: Sequence[Sequence[int] | np.ndarray | Concept], n: int | None = None) -> ConceptClass:
    concepts = []
    for t in tables:
        if isinstance(t, Concept):
            concepts.append(t)
            continue
        t = np.asarray(t)
        concepts.append(Concept(n if n is not None else int(math.log2(len(t))), t))
    if not concepts:
        raise ValueError("a concept class must be non-empty")
    return ConceptClass(concepts[0].n, tuple(concepts))


BUILDERS = {
    "parity": parity_class,
    "points_plus_zero": point_functions_plus_zero,
    "all": all_functions,
    "conjunctions": conjunctions,
}


def build(kind: str, n: int) -> ConceptClass:
    try:
        builder = BUILDERS[kind]
    except KeyError:
        raise ValueError(f"unknown class kind {kind!r}") from None
    return builder(n)


def builtin_classes() -> dict[str, ConceptClass]:
    """The small classes every consistency check iterates over (|C| <= 20)."""
    out = {}
    for n in (1, 2, 3, 4):
        out[f"parity n={n}"] = parity_class(n)
        out[f"points_plus_zero n={n}"] = point_functions_plus_zero(n)
    for n in (1, 2):
        out[f"all n={n}"] = all_functions(n)
        out[f"conjunctions n={n}"] = conjunctions(n)
    return out


# ----------------------------------------------------------------- JSON ---

def class_to_json(cls: ConceptClass) -> dict:
    return {"n": cls.n, "kind": cls.kind, "tables": [c.to_hex() for c in cls]}


def class_from_json(obj: dict) -> ConceptClass:
    """Load the concept-class JSON schema.

    Named kinds may omit ``tables``; when given they must match the builder.
    """
    if not isinstance(obj, dict) or "n" not in obj or "kind" not in obj:
        raise ValueError("class JSON needs 'n' and 'kind'")
    n, kind = obj["n"], obj["kind"]
    if not isinstance(n, int) or isinstance(n, bool):
        raise ValueError("'n' must be an integer")
    tables = obj.get("tables")
    if kind == "explicit":
        if not tables:
            raise ValueError("explicit classes need 'tables'")
        return ConceptClass(n, tuple(Concept.from_hex(n, t) for t in tables))
    cls = build(kind, n)
    if tables is not None and [c.to_hex() for c in cls] != [t.lower() for t in tables]:
        raise ValueError(f"tables do not match the built-in {kind} class")
    return cls


def load_class(path: str | Path) -> ConceptClass:
    with open(path) as fh:
        return class_from_json(json.load(fh))


def parse_class_spec(spec: str) -> ConceptClass:
    """Parse inline specs such as ``"parity n=3"`` or ``"all 2"``."""
    parts = spec.replace(",", " ").split()
    if not parts:
        raise ValueError("empty class spec")
    kind, rest = parts[0], parts[1:]
    n = None
    for tok in rest:
        key, _, val = tok.partition("=")
        if not val:
            key, val = "n", key
        if key != "n":
            raise ValueError(f"unknown class parameter {key!r}")
        n = int(val)
    if n is None:
        raise ValueError(f"class spec {spec!r} is missing n")
    return build(kind, n)
