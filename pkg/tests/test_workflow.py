import numpy as np
import pytest

from scgvb.workflow import (
    CONVENTIONS,
    DeterminantProblem,
    compare_tables,
    thread_count,
    unique_pairs,
)

from .reference_values import TARGET_HAMILTONIAN, as_matrix


def test_two_body_convention_and_nuclear_repulsion(square, square_textbook):
    target = as_matrix(TARGET_HAMILTONIAN)
    S, H = square.lowdin
    assert np.max(np.abs(H - target)) < 1e-7
    # adding E_nuc * S, or using the 1/2 two-electron prefactor, misses the table
    assert np.max(np.abs(H + square.integrals.e_nuc * S - target)) > 0.1
    assert np.max(np.abs(square_textbook.lowdin[1] - target)) > 0.1
    assert CONVENTIONS["tables"] == 2.0 and CONVENTIONS["textbook"] == 1.0


def test_compare_tables_conventions():
    A = np.zeros((3, 3))
    B = np.zeros((3, 3))
    B[0, 1] = B[1, 0] = 0.3
    B[2, 2] = 0.6
    d = compare_tables(A, B)
    assert d.max == pytest.approx(0.6) and d.argmax == (3, 3)
    assert d.mean_unique == pytest.approx(0.9 / 6)
    assert d.mean_full == pytest.approx(1.2 / 9)
    assert d.rms_full == pytest.approx(np.sqrt((0.09 * 2 + 0.36) / 9))
    assert compare_tables(A, A).max == 0.0
    with pytest.raises(ValueError):
        compare_tables(A, np.zeros((2, 2)))


def test_thread_count(monkeypatch):
    monkeypatch.delenv("SCGVB_THREADS", raising=False)
    assert thread_count() == 1
    monkeypatch.setenv("SCGVB_THREADS", "3")
    assert thread_count() == 3
    monkeypatch.setenv("SCGVB_THREADS", "0")
    with pytest.raises(ValueError):
        thread_count()


def test_unique_pairs():
    assert len(unique_pairs(6)) == 21


def test_reference_kinds(square):
    assert square.reference("lowdin") is square.lowdin
    with pytest.raises(ValueError):
        square.reference("nope")
    assert isinstance(square, DeterminantProblem)
