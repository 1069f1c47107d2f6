import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scgvb.estimators import (
    CircuitError,
    EstimatorConfig,
    Gate,
    Mode,
    ShallowCircuit,
    doe_overlap,
    evaluate_plan,
    eigenvalue_from_bitstring,
    group_qwc,
    pghe_matrix_element,
    resource_report,
    sample_bitstrings,
)
from scgvb.pauli import PauliSum, PauliTerm, qwc_compatible, sum_mul
from scgvb.structures import Determinant

from .helpers import random_spd

EXACT = EstimatorConfig()


def test_rotation_circuits():
    c = ShallowCircuit.basis_rotation("XYZI")
    assert c.gates == ((Gate.H,), (Gate.SDG, Gate.H), (), ())
    assert c.depth == 2 and c.n_multi_qubit_gates == 0
    # X and Y eigenbases rotate |0> to an equal superposition
    assert np.allclose(c.qubit_probabilities(), [0.5, 0.5, 0, 0])
    with pytest.raises(CircuitError):
        ShallowCircuit(1, ((Gate.H, Gate.H, Gate.H),))


def test_pauli_pair_circuit():
    c = ShallowCircuit.pauli_pair(PauliTerm.from_label("XZI"), PauliTerm.from_label("YIZ"))
    assert c.gates == ((Gate.X, Gate.Y), (Gate.Z,), (Gate.Z,))
    assert np.allclose(c.qubit_probabilities(), [0, 0, 0])
    c = ShallowCircuit.pauli_pair(PauliTerm.from_label("XI"), PauliTerm.from_label("IY"))
    assert np.allclose(c.qubit_probabilities(), [1, 1])


def test_sampling_statistics():
    c = ShallowCircuit.basis_rotation("XI")
    d = sample_bitstrings(c, 100_000, seed=3)
    f = d.as_dict()
    assert set(f) <= {"00", "10"}
    assert f["10"] / 100_000 == pytest.approx(0.5, abs=0.01)
    exact = sample_bitstrings(c, None).as_dict()
    assert exact.keys() == {"00", "10"} and np.allclose(list(exact.values()), 0.5)
    # same stream, same counts; a different stream differs
    again = sample_bitstrings(c, 100_000, seed=3)
    other = sample_bitstrings(c, 100_000, seed=3, stream=(1,))
    assert np.array_equal(d.weights, again.weights)
    assert not np.array_equal(d.weights, other.weights)
    with pytest.raises(ValueError):
        sample_bitstrings(c, 0)


def test_point_mass_uses_no_randomness():
    c = ShallowCircuit.pauli_pair(PauliTerm.from_label("XX"), PauliTerm.from_label("II"))
    d = sample_bitstrings(c, 1000, seed=1)
    assert d.as_dict() == {"11": 1000} and d.prob_zero() == 0.0


def test_eigenvalues():
    t = PauliTerm.from_label("ZIZ")
    assert eigenvalue_from_bitstring(t, "000") == 1
    assert eigenvalue_from_bitstring(t, "100") == -1
    assert eigenvalue_from_bitstring(t, "101") == 1
    assert eigenvalue_from_bitstring(t, "010") == 1
    with pytest.raises(ValueError):
        eigenvalue_from_bitstring(t, "10")


labels = st.text(alphabet="IXYZ", min_size=4, max_size=4)


@settings(max_examples=60)
@given(st.lists(st.tuples(labels, st.floats(0.1, 2)), min_size=1, max_size=25))
def test_grouping_partitions_into_qwc_sets(items):
    op = PauliSum.from_terms(4, items)
    groups = group_qwc(op)
    members = [(t.x_mask, t.z_mask) for g in groups for t in g.members]
    assert sorted(members) == sorted(op.terms)
    for g in groups:
        ms = g.members
        assert all(qwc_compatible(a, b) for a in ms for b in ms)
        rot = g.rotation_letters
        for t in ms:
            assert all(l == "I" or l == rot[q] for q, l in enumerate(t.label))


def test_grouping_order_is_descending_first_fit():
    op = PauliSum.from_terms(2, [("XI", 0.1), ("ZI", 3.0), ("IX", 2.0), ("ZX", 1.0)])
    groups = group_qwc(op)
    assert [[t.label for t in g.members] for g in groups] == [["ZI", "IX", "ZX"], ["XI"]]


def _random_pair(rng, n_so=6, n_el=3):
    S = random_spd(rng, n_so)
    a = Determinant(tuple(sorted(rng.choice(np.arange(1, n_so + 1), n_el, replace=False))), n_so)
    b = Determinant(tuple(sorted(rng.choice(np.arange(1, n_so + 1), n_el, replace=False))), n_so)
    return S, a, b


def test_doe_sampled_equals_exact():
    S, a, b = _random_pair(np.random.default_rng(0))
    f, w = b.creation_sum(), a.annihilation_sum(S)
    exact = doe_overlap(f, w)
    sampled = doe_overlap(f, w, EstimatorConfig(Mode.SAMPLED, shots=1024, seed=5))
    assert sampled.value == exact.value
    assert exact.value == pytest.approx(sum_mul(w, f).vacuum_expectation().real, abs=1e-12)
    assert exact.max_depth <= 2 and exact.n_multi_qubit_gates == 0
    assert exact.n_circuits == len(f) * len(w)


def test_pghe_identity_reduces_to_doe():
    S, a, b = _random_pair(np.random.default_rng(1))
    f, w = b.creation_sum(), a.annihilation_sum(S)
    ident = PauliSum.identity(6)
    pg = pghe_matrix_element(w, ident, f)
    assert pg.value == pytest.approx(doe_overlap(f, w).value, abs=1e-12)
    noisy = pghe_matrix_element(w, ident, f, EstimatorConfig(Mode.SAMPLED, shots=4096, seed=0))
    assert noisy.value == pytest.approx(pg.value, abs=0.05)


def test_pghe_exact_matches_dense(square):
    w, f = square.w_sums[1], square.f_sums[2]
    op = square.encoding.qubit_op
    dense = (w.to_dense() @ op.to_dense() @ f.to_dense())[0, 0]
    res = pghe_matrix_element(w, square.encoding, f)
    assert res.value == pytest.approx(dense.real, abs=1e-10)
    assert set(res.diagnostics["parts"]) == {"one_body", "two_body"}
    assert res.max_depth <= 2


def test_sampled_streams_are_independent_of_order(square):
    cfg = EstimatorConfig(Mode.SAMPLED, shots=2048, seed=11)
    plan = square.plan(0, 3)
    first = evaluate_plan(plan, cfg, stream=(0, 3))
    evaluate_plan(square.plan(1, 1), cfg, stream=(1, 1))
    second = evaluate_plan(plan, cfg, stream=(0, 3))
    assert first.value == second.value


def test_resource_report():
    S, a, b = _random_pair(np.random.default_rng(2))
    f, w = b.creation_sum(), a.annihilation_sum(S)
    results = [doe_overlap(f, w), pghe_matrix_element(w, PauliSum.identity(6), f)]
    rep = resource_report(results)
    assert rep["n_circuits"] == sum(r.n_circuits for r in results)
    assert rep["max_depth"] <= 2 and rep["n_multi_qubit_gates"] == 0
    assert rep["n_measurements"] == rep["n_circuits"] * EXACT.shots * 6


def test_config_validation():
    with pytest.raises(ValueError):
        EstimatorConfig(Mode.SAMPLED, shots=0)
    with pytest.raises(ValueError):
        EstimatorConfig("bogus")
    assert EstimatorConfig("sampled").mode is Mode.SAMPLED
