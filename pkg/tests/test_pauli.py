import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scgvb.pauli import (
    PauliSum,
    PauliTerm,
    linear_combination,
    pauli_mul,
    qwc_compatible,
    sum_mul,
    vacuum_amplitude,
)

N = 3
labels = st.text(alphabet="IXYZ", min_size=N, max_size=N)
coeffs = st.complex_numbers(min_magnitude=0.01, max_magnitude=5, allow_nan=False, allow_infinity=False)
sums = st.lists(st.tuples(labels, coeffs), min_size=1, max_size=6).map(
    lambda items: PauliSum.from_terms(N, items)
)


def test_single_qubit_products():
    X, Y, Z = (PauliTerm.from_label(c) for c in "XYZ")
    xy = pauli_mul(X, Y)
    assert xy.label == "Z" and xy.phase == 1j
    yx = pauli_mul(Y, X)
    assert yx.label == "Z" and yx.phase == -1j
    zz = pauli_mul(Z, Z)
    assert zz.label == "I" and zz.phase == 1


def test_label_orders_qubit_one_first():
    t = PauliTerm.from_label("XIZ")
    assert t.letter(1) == "X" and t.letter(2) == "I" and t.letter(3) == "Z"
    assert t.support == 0b101


@given(labels, labels)
def test_product_matches_dense(a, b):
    A, B = PauliTerm.from_label(a), PauliTerm.from_label(b)
    P = pauli_mul(A, B)
    assert np.allclose(P.to_dense(), A.to_dense() @ B.to_dense())


@given(labels, labels)
def test_qwc_implies_commuting(a, b):
    A, B = PauliTerm.from_label(a).to_dense(), PauliTerm.from_label(b).to_dense()
    if qwc_compatible(PauliTerm.from_label(a), PauliTerm.from_label(b)):
        assert np.allclose(A @ B, B @ A)


@given(labels)
def test_vacuum_amplitude(a):
    t = PauliTerm.from_label(a)
    assert np.isclose(vacuum_amplitude(t), t.to_dense()[0, 0])


@settings(max_examples=50)
@given(sums, sums, sums)
def test_sum_algebra(a, b, c):
    assert np.allclose((a * b).to_dense(), a.to_dense() @ b.to_dense())
    assert (a * (b * c)).allclose((a * b) * c, atol=1e-9)
    assert (a * (b + c)).allclose(a * b + a * c, atol=1e-9)
    assert np.allclose(a.adjoint().to_dense(), a.to_dense().conj().T)


@given(sums)
def test_render_parse_roundtrip(a):
    assert PauliSum.parse(a.render()).allclose(a, atol=1e-12)


@given(sums)
def test_vacuum_expectation(a):
    assert np.isclose(a.vacuum_expectation(), a.to_dense()[0, 0])


def test_cancellation_prunes():
    a = PauliSum.from_terms(2, [("XZ", 1.0)])
    assert len(a - a) == 0


def test_linear_combination_matches_sum():
    a = PauliSum.from_terms(2, [("XZ", 1.0), ("YY", 0.5j)])
    b = PauliSum.from_terms(2, [("XZ", -2.0), ("ZI", 1.0)])
    lc = linear_combination(2, [(2.0, a), (1.0, b)])
    assert lc.allclose(a.scale(2) + b)
    assert lc.coefficient("XZ") == 0


def test_large_register_uses_sparse_merge():
    # beyond the dense bincount limit
    n = 12
    a = PauliSum.from_terms(n, [("X" * n, 1.0), ("Z" * n, 1.0)])
    prod = sum_mul(a, a)
    # X^n Z^n = (-iY)^n and Z^n X^n = (iY)^n, both +Y^n for n = 12
    assert prod.allclose(PauliSum.from_terms(n, [("I" * n, 2.0), ("Y" * n, 2.0)]))


def test_register_checks():
    with pytest.raises(ValueError):
        PauliSum(2, {(0b100, 0): 1.0})
    with pytest.raises(ValueError):
        PauliSum.from_terms(2, [("X", 1.0)])
