import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import qmq_matrix, single_qubit_operator
from qlearn.concepts import Concept, Distribution
from qlearn.quantum import (
    Dense,
    Gates,
    NetworkError,
    Oracle,
    Qex,
    QuantumState,
    QueryNetwork,
    apply_answer_bits,
    apply_gate,
    apply_qmq,
    euclidean_distance,
    gates_to_matrix,
    haar_unitary,
    is_unitary,
    measure_distribution,
    network_from_json,
    network_to_json,
    prepare_qex,
    query_magnitudes,
    random_network,
    run_network,
    run_with_overrides,
    total_variation,
)

H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


def unitary_with_first_column(v: np.ndarray) -> np.ndarray:
    """Complete a unit vector to a unitary by QR on [v | I]."""
    dim = len(v)
    q, r = np.linalg.qr(np.column_stack([v, np.eye(dim)])[:, :dim])
    return q * (r[0, 0] / abs(r[0, 0]))


@pytest.mark.parametrize("m, q", [(1, 0), (3, 0), (3, 2), (4, 1)])
def test_single_qubit_gate_matches_kron(m, q, rng):
    psi = QuantumState.random(m, rng)
    got = apply_gate(psi.amplitudes, m, ("H", q))
    assert np.allclose(got, single_qubit_operator(H, q, m) @ psi.amplitudes)


def test_phase_and_cnot_matrices():
    P = gates_to_matrix(1, [("P", 0, np.pi / 2)])
    assert np.allclose(P, np.diag([1, 1j]))
    C = gates_to_matrix(2, [("CNOT", 0, 1)])
    assert np.allclose(C, [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])


def test_gate_errors():
    with pytest.raises(NetworkError):
        apply_gate(np.ones(2), 1, ("H", 3))
    with pytest.raises(NetworkError):
        apply_gate(np.ones(2), 1, ("T", 0))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2), st.integers(0, 2**31))
def test_qmq_matches_permutation_matrix(n, extra, seed):
    rng = np.random.default_rng(seed)
    m = n + 1 + extra
    c = Concept(n, rng.integers(0, 2, 1 << n))
    psi = QuantumState.random(m, rng)
    expected = qmq_matrix(tuple(int(v) for v in c.table), n, m) @ psi.amplitudes
    assert np.allclose(apply_qmq(psi, c).amplitudes, expected)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**31))
def test_qmq_is_norm_preserving_involution(n, seed):
    rng = np.random.default_rng(seed)
    c = Concept(n, rng.integers(0, 2, 1 << n))
    psi = QuantumState.random(n + 2, rng)
    once = apply_qmq(psi, c)
    assert abs(once.norm() - 1) < 1e-12
    assert np.allclose(apply_qmq(once, c).amplitudes, psi.amplitudes)


def test_qmq_zero_concept_is_identity(rng):
    psi = QuantumState.random(3, rng)
    assert np.array_equal(apply_qmq(psi, Concept.zero(2)).amplitudes, psi.amplitudes)


def test_qex_state():
    c = Concept(2, [0, 1, 1, 0])
    d = Distribution(2, np.array([0.1, 0.2, 0.3, 0.4]))
    s = prepare_qex(c, d, 3)
    expected = np.zeros(8)
    for x in range(4):
        expected[(x << 1) | int(c.table[x])] = np.sqrt(d.weights[x])
    assert np.allclose(s.amplitudes, expected)
    assert abs(s.norm() - 1) < 1e-12


def test_network_validation():
    with pytest.raises(NetworkError):
        QueryNetwork(m=1, n=1, stages=[])
    with pytest.raises(NetworkError):
        QueryNetwork(m=2, n=1, stages=[Dense(np.ones((4, 4)))])
    with pytest.raises(NetworkError):
        QueryNetwork(m=2, n=1, stages=[Gates(), Qex()])
    with pytest.raises(NetworkError):
        QueryNetwork(m=4, n=1, stages=[Qex(), Oracle()])
    with pytest.raises(NetworkError):
        QueryNetwork(m=3, n=1, stages=[Qex(), Qex()])


def test_qubit_cap(monkeypatch):
    with pytest.raises(NetworkError):
        QueryNetwork(m=13, n=1, stages=[])
    monkeypatch.setenv("QLEARN_MAX_QUBITS", "13")
    assert QueryNetwork(m=13, n=1, stages=[]).m == 13


@pytest.mark.parametrize("n, T", [(1, 1), (2, 2), (3, 1)])
def test_run_preserves_norm_and_trace_length(n, T, rng):
    net = random_network(n, T, rng)
    c = Concept(n, rng.integers(0, 2, 1 << n))
    res = run_network(net, c)
    assert len(res.trace) == T
    assert abs(res.final.norm() - 1) < 1e-9


def test_run_matches_explicit_matrix_product(rng):
    n, T, m = 2, 2, 4
    net = random_network(n, T, rng, m=m)
    c = Concept(n, [1, 0, 1, 1])
    P = qmq_matrix((1, 0, 1, 1), n, m)
    v = np.zeros(1 << m, dtype=complex)
    v[0] = 1
    for stage in net.stages:
        v = P @ v if isinstance(stage, Oracle) else stage.matrix @ v
    assert np.allclose(run_network(net, c).final.amplitudes, v)


def test_query_magnitudes_sum_to_one(rng):
    net = random_network(2, 3, rng, m=4)
    q = query_magnitudes(net, Concept(2, [0, 1, 1, 1]))
    assert q.shape == (3, 4)
    assert np.allclose(q.sum(axis=1), 1)


def test_overrides_empty_and_true_answers_are_exact(rng):
    net = random_network(2, 2, rng)
    c = Concept(2, [1, 0, 0, 1])
    final = run_network(net, c).final
    assert euclidean_distance(final, run_with_overrides(net, c, {})) == 0.0
    same = {(t, x): c(x) for t in range(2) for x in range(4)}
    assert euclidean_distance(final, run_with_overrides(net, c, same)) == 0.0


def test_override_validation(rng):
    net = random_network(1, 1, rng)
    with pytest.raises(ValueError):
        run_with_overrides(net, Concept(1, [0, 1]), {(1, 0): 1})
    with pytest.raises(ValueError):
        run_with_overrides(net, Concept(1, [0, 1]), {(0, 0): 2})


@pytest.mark.parametrize("eps", [0.05, 0.1, 0.3])
def test_override_displacement_can_reach_twice_eps(eps):
    """A query component in the |-> answer state flips sign under an answer flip.

    Mass eps^2 on string 1 with answer qubit |-> gives displacement exactly 2 eps,
    so the override bound holds with 2 eps and not with eps.
    """
    v = np.zeros(4, dtype=complex)
    v[0b00] = np.sqrt(1 - eps**2)
    v[0b10], v[0b11] = eps / np.sqrt(2), -eps / np.sqrt(2)
    U0 = unitary_with_first_column(v)
    assert is_unitary(U0) and np.allclose(U0[:, 0], v)
    net = QueryNetwork(m=2, n=1, stages=[Dense(U0), Oracle(), Dense(np.eye(4))])
    c = Concept.zero(1)
    q = query_magnitudes(net, c)
    assert abs(q[0, 1] - eps**2) < 1e-12
    dist = euclidean_distance(run_network(net, c).final, run_with_overrides(net, c, {(0, 1): 1}))
    assert abs(dist - 2 * eps) < 1e-12


def test_measure_distribution_marginals():
    s = QuantumState.basis(3, 0b101)
    assert measure_distribution(s, [0]).weights.tolist() == [0, 1]
    assert measure_distribution(s, [1]).weights.tolist() == [1, 0]
    assert measure_distribution(s, [2, 0]).weights.tolist() == [0, 0, 0, 1]


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**31))
def test_total_variation_at_most_four_euclidean(m, seed):
    rng = np.random.default_rng(seed)
    phi, psi = QuantumState.random(m, rng), QuantumState.random(m, rng)
    e = euclidean_distance(phi, psi)
    for q in range(m):
        assert total_variation(measure_distribution(phi, [q]), measure_distribution(psi, [q])) <= 4 * e + 1e-12


def test_haar_unitary_is_unitary(rng):
    assert is_unitary(haar_unitary(8, rng))


@pytest.mark.parametrize("spread", [0.05, 0.5, 1.0])
def test_random_network_stages_unitary(spread, rng):
    net = random_network(2, 2, rng, spread=spread)
    assert net.T == 2
    assert all(is_unitary(s.matrix) for s in net.stages if isinstance(s, Dense))


def test_network_json_round_trip(rng):
    net = random_network(1, 2, rng)
    back = network_from_json(json.loads(json.dumps(network_to_json(net))))
    c = Concept(1, [1, 0])
    assert np.allclose(run_network(net, c).final.amplitudes, run_network(back, c).final.amplitudes)


def test_network_json_rejects_unknown_stage():
    with pytest.raises(ValueError):
        network_from_json({"n": 1, "stages": [{"type": "teleport"}]})


def test_answer_bits_rejects_small_register():
    with pytest.raises(NetworkError):
        apply_answer_bits(QuantumState.zero(2), 2, np.zeros(4))
