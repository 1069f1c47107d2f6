import json
from fractions import Fraction

import numpy as np
import pytest

from scgvb.structures import (
    Determinant,
    PairingPattern,
    all_pairings,
    build_determinant_basis,
    contract_to_structures,
    expand_pairing,
    h4_basis,
    permutation_parity,
    rumer_patterns,
    spin_count,
)

from .reference_values import H4_BITSTRINGS, H4_STRUCTURE_ROWS


@pytest.mark.parametrize("N,S,expected", [(2, 0, 1), (4, 0, 2), (6, 0, 5), (3, Fraction(1, 2), 2), (4, 1, 3)])
def test_spin_count_small(N, S, expected):
    assert spin_count(N, S) == expected


def test_spin_count_errors():
    with pytest.raises(ValueError):
        spin_count(4, Fraction(1, 2))
    with pytest.raises(ValueError):
        spin_count(4, 3)
    with pytest.raises(ValueError):
        spin_count(0, 0)


@pytest.mark.parametrize("N", [2, 4, 6, 8])
def test_rumer_count_matches_singlet_count(N):
    pats = rumer_patterns(N)
    assert len(pats) == spin_count(N, 0)
    assert all(p.is_noncrossing() for p in pats)
    assert len(all_pairings(N)) == np.prod(range(N - 1, 0, -2))


def test_crossing_detection():
    assert not PairingPattern(((1, 3), (2, 4))).is_noncrossing()
    assert PairingPattern(((1, 4), (2, 3))).is_noncrossing()
    with pytest.raises(ValueError):
        PairingPattern(((1, 2), (2, 3)))


def test_pair_expansion():
    prims = expand_pairing(PairingPattern(((1, 2), (3, 4))))
    assert {(p.pattern, p.coefficient) for p in prims} == {
        ("abab", 1), ("abba", -1), ("baab", -1), ("baba", 1)
    }


def test_parity():
    assert permutation_parity([1, 2, 3]) == 1
    assert permutation_parity([2, 1, 3]) == -1
    assert permutation_parity([1, 6, 3, 8]) == -1


def test_h4_basis():
    basis = h4_basis()
    assert [d.bitstring for d in basis.determinants] == H4_BITSTRINGS
    assert [d.sign for d in basis.determinants] == [-1, 1, 1, -1, 1, 1]
    assert basis.structure_coeffs.tolist() == H4_STRUCTURE_ROWS
    blob = json.loads(basis.to_json())
    assert blob["structure_coeffs"] == H4_STRUCTURE_ROWS


def test_contraction_with_unit_overlap():
    basis = h4_basis()
    assert np.array_equal(contract_to_structures(np.eye(6), basis), [[4, -2], [-2, 4]])
    with pytest.raises(ValueError):
        contract_to_structures(np.eye(5), basis)


def test_h2_basis():
    basis = build_determinant_basis(2, rumer_patterns(2))
    assert [d.bitstring for d in basis.determinants] == ["1001", "0110"]
    # a1 b2 - b1 a2, with the second primitive reordered to ascending spin-orbitals
    assert basis.B.tolist() == [[1.0, -1.0]]
    assert [d.sign for d in basis.determinants] == [1, -1]


def test_determinant_strings():
    d = Determinant.from_electron_order([1, 6, 3, 8], 8)
    assert d.occupied == (1, 3, 6, 8) and d.sign == -1
    assert [str(op) for op in d.f_string] == ["a1+", "a3+", "a6+", "a8+"]
    assert [str(op) for op in d.w_string] == ["a8", "a6", "a3", "a1"]
    assert Determinant.from_bitstring("10100101").occupied == (1, 3, 6, 8)
    with pytest.raises(ValueError):
        Determinant((3, 1), 4)
    with pytest.raises(ValueError):
        Determinant((1, 9), 8)
