"""Perfect-pairing spin couplings and their nonorthogonal determinant basis.

Electron ``k`` sits in spatial orbital ``k`` (one electron per orbital).  An
alpha electron in orbital ``i`` occupies spin-orbital ``i``; a beta electron
occupies ``i + M`` (both 1-based).  A spin primitive therefore lists its
spin-orbitals in electron order.  Each determinant is stored with the creation
string in ascending spin-orbital order plus ``sign``, the parity of the
permutation from electron order to ascending order, so that

    |Omega> = sign * a+_{p1} a+_{p2} ... |vac>,   p1 < p2 < ...
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import Sequence

import numpy as np

from .nojw import FermionOp, OpKind, map_operator_string
from .pauli import PauliSum


# ---------------------------------------------------------------- counting
def spin_count(N: int, S) -> int:
    """Number of independent N-electron spin eigenfunctions with total spin S."""
    S = Fraction(S).limit_denominator(2)
    if N < 1:
        raise ValueError("N must be positive")
    if S < 0 or S > Fraction(N, 2):
        raise ValueError(f"S={S} outside [0, N/2] for N={N}")
    k = Fraction(N, 2) - S
    if k.denominator != 1:
        raise ValueError(f"S={S} has the wrong parity for N={N}")
    k = int(k)
    two_s = int(2 * S)
    num = (two_s + 1) * math.factorial(N)
    den = math.factorial(N - k + 1) * math.factorial(k)
    return num // den


# ---------------------------------------------------------------- pairings
@dataclass(frozen=True)
class PairingPattern:
    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        pairs = tuple(tuple(sorted(map(int, p))) for p in self.pairs)
        flat = [i for p in pairs for i in p]
        if any(len(p) != 2 for p in pairs):
            raise ValueError("pairs must have two members")
        if len(set(flat)) != len(flat):
            raise ValueError(f"overlapping pairs in {pairs}")
        if sorted(flat) != list(range(1, len(flat) + 1)):
            raise ValueError(f"pairs {pairs} do not cover electrons 1..{len(flat)}")
        object.__setattr__(self, "pairs", pairs)

    @property
    def n_electrons(self) -> int:
        return 2 * len(self.pairs)

    def is_noncrossing(self) -> bool:
        for (a, b) in self.pairs:
            for (c, d) in self.pairs:
                if a < c < b < d:
                    return False
        return True


@dataclass(frozen=True)
class SpinPrimitive:
    """A spin product such as ``abab`` (a = alpha, b = beta) with a +-1 coefficient.

    The normalization ``2**(-n_pairs/2)`` is not included.
    """

    pattern: str
    coefficient: int

    @property
    def n_alpha(self) -> int:
        return self.pattern.count("a")


def expand_pairing(pattern: PairingPattern) -> list[SpinPrimitive]:
    """Expand ``prod (alpha_i beta_j - beta_i alpha_j)`` over the pairs."""
    n = pattern.n_electrons
    out = []
    for choice in product((0, 1), repeat=len(pattern.pairs)):
        spins = [""] * n
        coeff = 1
        for (i, j), c in zip(pattern.pairs, choice):
            spins[i - 1], spins[j - 1] = ("a", "b") if c == 0 else ("b", "a")
            coeff = -coeff if c else coeff
        out.append(SpinPrimitive("".join(spins), coeff))
    return out


def rumer_patterns(N: int) -> list[PairingPattern]:
    """All non-crossing perfect pairings of electrons 1..N on a circle."""
    if N % 2:
        raise ValueError("need an even number of electrons")

    def rec(items):
        if not items:
            yield ()
            return
        first = items[0]
        for k in range(1, len(items), 2):
            inside, outside = items[1:k], items[k + 1 :]
            for a in rec(inside):
                for b in rec(outside):
                    yield ((first, items[k]),) + a + b

    return [PairingPattern(p) for p in rec(tuple(range(1, N + 1)))]


def all_pairings(N: int) -> list[PairingPattern]:
    if N % 2:
        raise ValueError("need an even number of electrons")

    def rec(items):
        if not items:
            yield ()
            return
        for k in range(1, len(items)):
            rest = items[1:k] + items[k + 1 :]
            for tail in rec(rest):
                yield ((items[0], items[k]),) + tail

    return [PairingPattern(p) for p in rec(tuple(range(1, N + 1)))]


# ---------------------------------------------------------------- determinants
def permutation_parity(seq: Sequence[int]) -> int:
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@dataclass(frozen=True)
class Determinant:
    """Occupied spin-orbitals (ascending, 1-based) with a fermionic sign."""

    occupied: tuple[int, ...]
    n_so: int
    sign: int = 1
    label: int = 0

    def __post_init__(self) -> None:
        occ = tuple(int(p) for p in self.occupied)
        if list(occ) != sorted(set(occ)):
            raise ValueError("occupied spin-orbitals must be strictly ascending")
        if occ and (occ[0] < 1 or occ[-1] > self.n_so):
            raise ValueError("occupied index outside register")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        object.__setattr__(self, "occupied", occ)

    @classmethod
    def from_electron_order(cls, spin_orbitals: Sequence[int], n_so: int, label: int = 0) -> Determinant:
        return cls(tuple(sorted(spin_orbitals)), n_so, permutation_parity(spin_orbitals), label)

    @classmethod
    def from_bitstring(cls, bits: str, sign: int = 1, label: int = 0) -> Determinant:
        return cls(tuple(i + 1 for i, b in enumerate(bits) if b == "1"), len(bits), sign, label)

    @property
    def n_electrons(self) -> int:
        return len(self.occupied)

    @property
    def bitstring(self) -> str:
        occ = set(self.occupied)
        return "".join("1" if p in occ else "0" for p in range(1, self.n_so + 1))

    @property
    def f_string(self) -> tuple[FermionOp, ...]:
        return tuple(FermionOp(OpKind.CREATE, p) for p in self.occupied)

    @property
    def w_string(self) -> tuple[FermionOp, ...]:
        return tuple(op.flipped() for op in reversed(self.f_string))

    def creation_sum(self) -> PauliSum:
        """``sign * f`` as a PauliSum; creators never see the overlap."""
        return map_operator_string(self.f_string, np.eye(self.n_so)).scale(self.sign)

    def annihilation_sum(self, S_so) -> PauliSum:
        """``sign * w`` with overlap-weighted annihilators."""
        return map_operator_string(self.w_string, S_so).scale(self.sign)


@dataclass(frozen=True, eq=False)
class StructureBasis:
    determinants: tuple[Determinant, ...]
    structure_coeffs: np.ndarray  # K x N_d, integer entries
    patterns: tuple[PairingPattern, ...] = ()

    @cached_property
    def B(self) -> np.ndarray:
        return np.asarray(self.structure_coeffs, dtype=float)

    def to_json(self) -> str:
        return json.dumps(
            {
                "determinants": [
                    {"label": d.label, "bitstring": d.bitstring, "sign": d.sign}
                    for d in self.determinants
                ],
                "structure_coeffs": np.asarray(self.structure_coeffs).astype(int).tolist(),
                "patterns": [[list(p) for p in pat.pairs] for pat in self.patterns],
            },
            indent=1,
        )


def build_determinant_basis(M: int, patterns: Sequence[PairingPattern], N: int | None = None) -> StructureBasis:
    N = M if N is None else N
    if N != M:
        raise ValueError("only one electron per orbital (N = M) is supported")
    n_so = 2 * M
    dets: dict[str, Determinant] = {}
    rows = []
    for pat in patterns:
        if pat.n_electrons != N:
            raise ValueError(f"pattern {pat.pairs} has {pat.n_electrons} electrons, expected {N}")
        row: dict[str, int] = {}
        for prim in expand_pairing(pat):
            eo = [k + 1 if s == "a" else k + 1 + M for k, s in enumerate(prim.pattern)]
            det = Determinant.from_electron_order(eo, n_so)
            key = det.bitstring
            if key not in dets:
                dets[key] = Determinant(det.occupied, n_so, det.sign, len(dets) + 1)
            row[key] = row.get(key, 0) + prim.coefficient
        rows.append(row)
    keys = list(dets)
    B = np.array([[row.get(k, 0) for k in keys] for row in rows], dtype=int)
    return StructureBasis(tuple(dets.values()), B, tuple(patterns))


def h4_basis() -> StructureBasis:
    """The two Rumer structures of four electrons in four orbitals."""
    return build_determinant_basis(
        4, [PairingPattern(((1, 2), (3, 4))), PairingPattern(((1, 4), (2, 3)))]
    )


def contract_to_structures(det_matrix, basis: StructureBasis) -> np.ndarray:
    M = np.asarray(det_matrix, dtype=float)
    nd = len(basis.determinants)
    if M.shape != (nd, nd):
        raise ValueError(f"expected a {nd}x{nd} matrix, got {M.shape}")
    B = basis.B
    return B @ M @ B.T
