"""Dense state-vector simulation of quantum query networks.

Register layout: qubit 0 is the most significant bit of the basis index.
Qubits ``0..n-1`` hold the query string x, qubit ``n`` the answer bit b and
the remaining ``m - n - 1`` qubits are workspace y, so the basis index of
``|x, b, y>`` is ``(x << (m-n)) | (b << (m-n-1)) | y``.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence, Union

import numpy as np

from qlearn.concepts import Concept, Distribution, index_of

NORM_TOL = 1e-9
DENSE_MAX_QUBITS = 10


class NetworkError(ValueError):
    pass


def max_qubits() -> int:
    return int(os.environ.get("QLEARN_MAX_QUBITS", 12))


@dataclass(eq=False)
class QuantumState:
    m: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (1 << self.m,):
            raise ValueError(f"need 2^{self.m} amplitudes, got {amps.shape}")
        self.amplitudes = amps

    @classmethod
    def zero(cls, m: int) -> QuantumState:
        if m > max_qubits():
            raise NetworkError(f"m = {m} exceeds the {max_qubits()}-qubit cap (QLEARN_MAX_QUBITS)")
        amps = np.zeros(1 << m, dtype=complex)
        amps[0] = 1.0
        return cls(m, amps)

    @classmethod
    def basis(cls, m: int, z: int) -> QuantumState:
        amps = np.zeros(1 << m, dtype=complex)
        amps[z] = 1.0
        return cls(m, amps)

    @classmethod
    def random(cls, m: int, rng: np.random.Generator) -> QuantumState:
        v = rng.normal(size=1 << m) + 1j * rng.normal(size=1 << m)
        return cls(m, v / np.linalg.norm(v))

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> QuantumState:
        return QuantumState(self.m, self.amplitudes.copy())

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


# ---------------------------------------------------------------- gates ---

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def _phase(theta: float) -> np.ndarray:
    return np.array([[1, 0], [0, np.exp(1j * theta)]], dtype=complex)


def _one_qubit(amps: np.ndarray, m: int, q: int, U: np.ndarray) -> np.ndarray:
    v = amps.reshape(1 << q, 2, 1 << (m - q - 1))
    return np.einsum("ij,ajb->aib", U, v).reshape(-1)


def _cnot(amps: np.ndarray, m: int, control: int, target: int) -> np.ndarray:
    if control == target:
        raise NetworkError("CNOT control and target must differ")
    idx = np.arange(1 << m)
    cbit = (idx >> (m - 1 - control)) & 1
    out = amps.copy()
    out[idx[cbit == 1]] = amps[idx[cbit == 1] ^ (1 << (m - 1 - target))]
    return out


def apply_gate(amps: np.ndarray, m: int, gate: Sequence) -> np.ndarray:
    """Apply one gate from the set H, X, Z, P(theta), CNOT.

    Gates are tuples: ``("H", q)``, ``("X", q)``, ``("Z", q)``,
    ``("P", q, theta)`` and ``("CNOT", control, target)``.
    """
    name = str(gate[0]).upper()
    qubits = [int(q) for q in (gate[1:3] if name == "CNOT" else gate[1:2])]
    if any(not 0 <= q < m for q in qubits):
        raise NetworkError(f"gate {gate!r} addresses a qubit outside 0..{m - 1}")
    if name == "H":
        return _one_qubit(amps, m, qubits[0], _H)
    if name == "X":
        return _one_qubit(amps, m, qubits[0], _X)
    if name == "Z":
        return _one_qubit(amps, m, qubits[0], _Z)
    if name in ("P", "PHASE"):
        return _one_qubit(amps, m, qubits[0], _phase(float(gate[2])))
    if name == "CNOT":
        return _cnot(amps, m, qubits[0], qubits[1])
    raise NetworkError(f"unknown gate {gate[0]!r}")


def gates_to_matrix(m: int, gates: Sequence[Sequence]) -> np.ndarray:
    eye = np.eye(1 << m, dtype=complex)
    cols = [_apply_gates(eye[:, j], m, gates) for j in range(1 << m)]
    return np.stack(cols, axis=1)


def _apply_gates(amps: np.ndarray, m: int, gates: Sequence[Sequence]) -> np.ndarray:
    for g in gates:
        amps = apply_gate(amps, m, g)
    return amps


# --------------------------------------------------------------- stages ---

@dataclass(frozen=True, eq=False)
class Dense:
    matrix: np.ndarray


@dataclass(frozen=True)
class Gates:
    gates: tuple = ()


@dataclass(frozen=True)
class Oracle:
    """A QMQ slot."""


@dataclass(frozen=True)
class Qex:
    """A QEX slot; only legal at the bottom of the circuit."""


Stage = Union[Dense, Gates, Oracle, Qex]
Decode = Callable[[int], Union[Concept, None]]


def is_unitary(U: np.ndarray, tol: float = NORM_TOL) -> bool:
    U = np.asarray(U)
    return U.ndim == 2 and U.shape[0] == U.shape[1] and np.allclose(U @ U.conj().T, np.eye(U.shape[0]), atol=tol, rtol=0)


@dataclass(eq=False)
class QueryNetwork:
    """U_0, O_1, U_1, ..., O_T, U_T plus a measured-qubit decode rule.

    ``measured`` lists the qubits read out at the end; ``decode`` maps the
    observed substring (big-endian over ``measured``) to a hypothesis concept,
    or ``None`` when the outcome names no hypothesis.
    """

    m: int
    n: int
    stages: list
    measured: tuple[int, ...] = ()
    decode: Decode | None = None
    name: str = ""
    qex_blocks: int = field(init=False, default=0)

    def __post_init__(self) -> None:
        if self.m < self.n + 1:
            raise NetworkError(f"m = {self.m} must be at least n + 1 = {self.n + 1}")
        if self.m > max_qubits():
            raise NetworkError(f"m = {self.m} exceeds the {max_qubits()}-qubit cap (QLEARN_MAX_QUBITS)")
        self.stages = list(self.stages)
        seen_other = False
        for st in self.stages:
            if isinstance(st, Qex):
                if seen_other:
                    raise NetworkError("QEX slots must precede every other stage")
                self.qex_blocks += 1
            else:
                seen_other = True
            if isinstance(st, Dense):
                if st.matrix.shape != (1 << self.m, 1 << self.m):
                    raise NetworkError("dense stage has the wrong dimension")
                if self.m > DENSE_MAX_QUBITS:
                    raise NetworkError(f"dense stages limited to m <= {DENSE_MAX_QUBITS}")
                if not is_unitary(st.matrix):
                    raise NetworkError("dense stage is not unitary")
        if self.qex_blocks and any(isinstance(st, Oracle) for st in self.stages):
            raise NetworkError("a network uses one kind of oracle gate, not both QMQ and QEX")
        if self.qex_blocks * (self.n + 1) > self.m:
            raise NetworkError("not enough qubits for one (n+1)-qubit block per QEX slot")
        if not self.measured:
            self.measured = tuple(range(self.n))

    @property
    def T(self) -> int:
        return sum(isinstance(st, (Oracle, Qex)) for st in self.stages)

    @property
    def uses_qex(self) -> bool:
        return self.qex_blocks > 0


# ------------------------------------------------------------- oracles ---

def apply_answer_bits(state: QuantumState, n: int, answers: np.ndarray) -> QuantumState:
    """|x, b, y> -> |x, b xor answers[x], y> for an arbitrary answer vector."""
    m = state.m
    if m < n + 1:
        raise NetworkError(f"m = {m} is smaller than n + 1 = {n + 1}")
    v = state.amplitudes.reshape(1 << n, 2, 1 << (m - n - 1))
    flip = np.asarray(answers, dtype=bool)
    out = v.copy()
    out[flip] = v[flip][:, ::-1, :]
    return QuantumState(m, out.reshape(-1))


def apply_qmq(state: QuantumState, c: Concept) -> QuantumState:
    return apply_answer_bits(state, c.n, c.table)


def prepare_qex(c: Concept, dist: Distribution, m: int) -> QuantumState:
    """sum_x sqrt(D(x)) |x, c(x), 0...0> on an m-qubit register."""
    if dist.n != c.n:
        raise ValueError("distribution and concept disagree on n")
    n = c.n
    if m < n + 1:
        raise NetworkError(f"m = {m} is smaller than n + 1 = {n + 1}")
    amps = np.zeros(1 << m, dtype=complex)
    xs = np.arange(1 << n)
    amps[(xs << (m - n)) | (c.table.astype(np.int64) << (m - n - 1))] = np.sqrt(dist.weights)
    return QuantumState(m, amps)


def _qex_initial(net: QueryNetwork, c: Concept, dist: Distribution) -> QuantumState:
    block = prepare_qex(c, dist, net.n + 1).amplitudes
    amps = np.ones(1, dtype=complex)
    for _ in range(net.qex_blocks):
        amps = np.kron(amps, block)
    rest = np.zeros(1 << (net.m - net.qex_blocks * (net.n + 1)), dtype=complex)
    rest[0] = 1.0
    return QuantumState(net.m, np.kron(amps, rest))


# ----------------------------------------------------------- execution ---

def _apply_unitary_stage(state: QuantumState, st: Stage) -> QuantumState:
    if isinstance(st, Dense):
        return QuantumState(state.m, st.matrix @ state.amplitudes)
    return QuantumState(state.m, _apply_gates(state.amplitudes, state.m, st.gates))


@dataclass
class RunResult:
    final: QuantumState
    trace: list[QuantumState]  # state immediately before each oracle call


OverrideTable = Mapping[tuple[int, int], int]


def _run(net: QueryNetwork, answers_at: Callable[[int], np.ndarray], initial: QuantumState) -> RunResult:
    state, trace, t = initial, [], 0
    for st in net.stages:
        if isinstance(st, Qex):
            trace.append(QuantumState.zero(net.m))
            t += 1
        elif isinstance(st, Oracle):
            trace.append(state)
            state = apply_answer_bits(state, net.n, answers_at(t))
            t += 1
        else:
            state = _apply_unitary_stage(state, st)
    return RunResult(state, trace)


def run_network(net: QueryNetwork, oracle: Concept | tuple[Concept, Distribution]) -> RunResult:
    """Run ``net`` with every oracle slot instantiated by the same oracle.

    ``oracle`` is a Concept for QMQ networks and a (Concept, Distribution)
    pair for QEX networks.
    """
    if isinstance(oracle, tuple):
        c, dist = oracle
        if not net.uses_qex:
            raise NetworkError("QEX oracle given to a QMQ network")
        initial = _qex_initial(net, c, dist)
    else:
        c = oracle
        if net.uses_qex:
            raise NetworkError("QEX network needs a (concept, distribution) oracle")
        initial = QuantumState.zero(net.m)
    if c.n != net.n:
        raise NetworkError(f"oracle concept has n = {c.n}, network expects {net.n}")
    return _run(net, lambda t: c.table, initial)


def run_with_overrides(net: QueryNetwork, c: Concept, table: OverrideTable) -> QuantumState:
    """Run ``net`` against QMQ_c with the answers at (t, x) in ``table`` replaced."""
    per_time: dict[int, list[tuple[int, int]]] = {}
    for (t, x), a in table.items():
        x = index_of(x, net.n)
        if not 0 <= t < net.T:
            raise ValueError(f"override time {t} outside 0..{net.T - 1}")
        if a not in (0, 1):
            raise ValueError("override answers must be bits")
        per_time.setdefault(t, []).append((x, a))

    def answers_at(t: int) -> np.ndarray:
        ans = c.table.copy()
        for x, a in per_time.get(t, ()):
            ans[x] = a
        return ans

    if net.uses_qex:
        raise NetworkError("overrides apply to QMQ networks only")
    return _run(net, answers_at, QuantumState.zero(net.m)).final


def query_magnitudes(net: QueryNetwork, c: Concept) -> np.ndarray:
    """q[t, x]: squared amplitude on query string x just before oracle call t+1."""
    trace = run_network(net, c).trace
    if not trace:
        return np.zeros((0, 1 << net.n))
    probs = np.stack([s.probabilities() for s in trace])
    return probs.reshape(len(trace), 1 << net.n, -1).sum(axis=2)


# ----------------------------------------------------------- measurement ---

def measure_distribution(state: QuantumState, qubits: Sequence[int]) -> Distribution:
    """Exact marginal over the listed qubits (big-endian in the given order)."""
    qubits = [int(q) for q in qubits]
    if not qubits:
        raise ValueError("measure at least one qubit")
    if len(set(qubits)) != len(qubits) or any(not 0 <= q < state.m for q in qubits):
        raise ValueError(f"bad qubit subset {qubits}")
    p = state.probabilities()
    p = p / p.sum()
    idx = np.arange(1 << state.m)
    out = np.zeros(len(idx), dtype=np.int64)
    for q in qubits:
        out = (out << 1) | ((idx >> (state.m - 1 - q)) & 1)
    return Distribution(len(qubits), np.bincount(out, weights=p, minlength=1 << len(qubits)))


def euclidean_distance(phi: QuantumState, psi: QuantumState) -> float:
    if phi.m != psi.m:
        raise ValueError("states live on different registers")
    return float(np.linalg.norm(phi.amplitudes - psi.amplitudes))


def total_variation(d1: Distribution, d2: Distribution) -> float:
    """sum_x |D1(x) - D2(x)| (no factor 1/2)."""
    if d1.n != d2.n:
        raise ValueError("distributions over different domains")
    return float(np.abs(d1.weights - d2.weights).sum())


# -------------------------------------------------------------- builders ---

def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_network(n: int, T: int, rng: np.random.Generator, m: int | None = None, spread: float = 1.0) -> QueryNetwork:
    """T-query network with random unitary stages.

    ``spread`` in (0, 1] scales the generator of each stage; small values give
    near-identity stages whose query magnitudes concentrate on few strings.
    """
    m = n + 1 if m is None else m
    dim = 1 << m
    stages: list = []
    for t in range(T + 1):
        if spread >= 1.0:
            U = haar_unitary(dim, rng)
        else:
            A = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
            H = (A + A.conj().T) / 2
            w, V = np.linalg.eigh(H)
            U = (V * np.exp(1j * spread * w)) @ V.conj().T
        stages.append(Dense(U))
        if t < T:
            stages.append(Oracle())
    return QueryNetwork(m=m, n=n, stages=stages, name=f"random(n={n},T={T})")


# ------------------------------------------------------------------ JSON ---

def _amps_to_json(U: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in U]


def network_to_json(net: QueryNetwork, decode_tables: Mapping[int, Concept] | None = None) -> dict:
    stages = []
    for st in net.stages:
        if isinstance(st, Dense):
            stages.append({"type": "dense", "payload": _amps_to_json(st.matrix)})
        elif isinstance(st, Gates):
            stages.append({"type": "gates", "payload": [list(g) for g in st.gates]})
        elif isinstance(st, Oracle):
            stages.append({"type": "oracle", "payload": None})
        else:
            stages.append({"type": "qex", "payload": None})
    out = {"m": net.m, "n": net.n, "measured": list(net.measured), "stages": stages}
    if decode_tables is not None:
        out["decode"] = {str(k): c.to_hex() for k, c in decode_tables.items()}
    return out


def network_from_json(obj: dict | list, n: int | None = None) -> QueryNetwork:
    """Parse a network description; a bare list of stages needs ``n``."""
    if isinstance(obj, list):
        obj = {"stages": obj, "n": n}
    n = obj.get("n", n)
    if n is None:
        raise ValueError("network JSON needs 'n'")
    stages: list = []
    m = obj.get("m")
    for raw in obj["stages"]:
        kind, payload = raw.get("type"), raw.get("payload")
        if kind == "dense":
            U = np.array([[complex(re, im) for re, im in row] for row in payload])
            stages.append(Dense(U))
            m = m or int(np.log2(len(U)))
        elif kind == "gates":
            stages.append(Gates(tuple(tuple(g) for g in payload)))
        elif kind == "oracle":
            stages.append(Oracle())
        elif kind == "qex":
            stages.append(Qex())
        else:
            raise ValueError(f"unknown stage type {kind!r}")
    m = m or n + 1
    decode = None
    if "decode" in obj:
        table = {int(k): Concept.from_hex(n, v) for k, v in obj["decode"].items()}
        decode = table.get
    measured = tuple(obj.get("measured", range(n)))
    return QueryNetwork(m=m, n=n, stages=stages, measured=measured, decode=decode)
