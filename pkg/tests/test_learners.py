import numpy as np
import pytest

from qlearn.classical import PacParams, empirical_error
from qlearn.concepts import Concept, ConceptClass, Distribution, parity_class, point_functions_plus_zero
from qlearn.learners import (
    build_parity_learner,
    certify_learner,
    constant_output_network,
    deutsch_jozsa_network,
    outcome_hypotheses,
    qex_sample,
    qex_sampling_learner,
)
from qlearn.verify import distinguishable_count


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_parity_learner_is_exact_with_one_query(n):
    cert = certify_learner(build_parity_learner(n), parity_class(n))
    assert cert.T == 1
    assert all(abs(r.success - 1) < 1e-9 for r in cert.results)
    assert cert.verdict


def test_parity_learner_outcome_is_index():
    net = build_parity_learner(3)
    c = parity_class(3)[5]
    probs, hyps = outcome_hypotheses(net, c)
    assert abs(probs[5] - 1) < 1e-12
    assert hyps[5] == c


def test_parity_learner_range():
    with pytest.raises(ValueError):
        build_parity_learner(0)
    with pytest.raises(ValueError):
        build_parity_learner(9)


def test_deutsch_jozsa_separates_constant_from_balanced():
    net = deutsch_jozsa_network(2)
    probs, _ = outcome_hypotheses(net, Concept.zero(2))
    assert abs(probs[0] - 1) < 1e-12
    probs, _ = outcome_hypotheses(net, Concept(2, [0, 1, 1, 0]))
    assert probs[0] < 1e-12


def test_undecodable_outcomes_count_as_failure():
    cls = ConceptClass(2, (Concept.zero(2), Concept(2, [0, 1, 1, 0])))
    cert = certify_learner(deutsch_jozsa_network(2), cls)
    assert cert.results[0].success == pytest.approx(1)
    assert cert.results[1].success == 0 and cert.results[1].undefined_mass == pytest.approx(1)
    assert not cert.verdict


def test_constant_output_network_certifies_only_its_output():
    cls = point_functions_plus_zero(2)
    cert = certify_learner(constant_output_network(2, cls[0]), cls)
    assert cert.T == 0
    assert [r.success for r in cert.results] == [1.0, 0.0, 0.0, 0.0, 0.0]
    payload = cert.to_json("ppz2")
    assert payload["verdict"] == "fail" and payload["min_success"] == 0.0


def test_dj_network_exceeds_stated_distinguishability_constant():
    """With T = 1 and eps = 0.5 every point function on n = 3 moves the final state
    by more than eps, which is 8 concepts against T^2 |C'| gamma-hat / eps^2 = 4."""
    cls = point_functions_plus_zero(3)
    far, mass = distinguishable_count(deutsch_jozsa_network(3), cls, 0.5)
    assert far == 8
    assert mass == pytest.approx(1.0)
    assert far > 1 * mass / 0.25
    assert far <= 4 * 1 * mass / 0.25


def test_qex_sample_labels_match_target(rng):
    c = Concept(2, [0, 1, 1, 0])
    sample = qex_sample(c, Distribution.uniform(2), 200, rng)
    assert all(c(x) == y for x, y in sample)
    xs = [x for x, _ in sample]
    assert set(xs) == {0, 1, 2, 3}


def test_qex_sample_respects_support(rng):
    d = Distribution.uniform_on(2, ["01", "10"])
    sample = qex_sample(Concept.zero(2), d, 100, rng)
    assert {x for x, _ in sample} <= {1, 2}


def test_qex_sampling_learner_is_seeded():
    cls = point_functions_plus_zero(2)
    params = PacParams(0.1, 0.1)
    a = qex_sampling_learner(cls, cls[2], Distribution.uniform(2), params, 11)
    b = qex_sampling_learner(cls, cls[2], Distribution.uniform(2), params, 11)
    assert a == b
    assert empirical_error(a, cls[2], Distribution.uniform(2)) <= 0.1


def test_certification_json_shape():
    payload = certify_learner(build_parity_learner(2), parity_class(2)).to_json("parity n=2", {"x": 1})
    assert set(payload) == {"class", "T", "per_target_success", "min_success", "verdict", "bounds"}
    assert list(payload["per_target_success"]) == ["0", "5", "3", "6"]
    assert np.isclose(payload["min_success"], 1.0)
