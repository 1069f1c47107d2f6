"""Jordan-Wigner images of fermion operators over nonorthogonal orbitals.

Spin-orbital indices in this module are 1-based, matching operator strings
written as ``a1+ a3+ a6+ a8+``.  Creation operators map to the ordinary JW
strings; the annihilator paired with a nonorthogonal creator picks up the
overlap, ``a_p -> sum_q S_pq Z...Z (X_q + iY_q)/2``.  Biorthogonal annihilators
``b_p = sum_q (S^-1)_pq a_q`` therefore map to the plain JW annihilator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .integrals import SpinOrbitalIntegrals
from .pauli import DEFAULT_PRUNE_TOL, PauliSum, linear_combination, sum_mul


class OpKind(str, Enum):
    CREATE = "create"
    ANNIHILATE_ADJOINT = "annihilate_adjoint"
    ANNIHILATE_BIORTH = "annihilate_biorth"


@dataclass(frozen=True)
class FermionOp:
    kind: OpKind
    index: int  # 1-based spin-orbital

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", OpKind(self.kind))
        if self.index < 1:
            raise ValueError(f"spin-orbital index must be >= 1, got {self.index}")

    def flipped(self) -> FermionOp:
        kind = OpKind.ANNIHILATE_ADJOINT if self.kind is OpKind.CREATE else OpKind.CREATE
        return FermionOp(kind, self.index)

    def __str__(self) -> str:
        return {"create": "a{}+", "annihilate_adjoint": "a{}", "annihilate_biorth": "b{}"}[
            self.kind.value
        ].format(self.index)


def _check_index(p: int, n: int) -> None:
    if not 1 <= p <= n:
        raise ValueError(f"index {p} outside register of {n} modes")


def _jw(p: int, n: int, y_sign: complex) -> PauliSum:
    zs = (1 << (p - 1)) - 1
    bit = 1 << (p - 1)
    return PauliSum(n, {(bit, zs): 0.5, (bit, zs | bit): 0.5 * y_sign * 1j})


def map_creation(p: int, n: int) -> PauliSum:
    """``Z_1 ... Z_{p-1} (X_p - iY_p)/2``."""
    _check_index(p, n)
    return _jw(p, n, -1)


def map_annihilation_canonical(p: int, n: int) -> PauliSum:
    """``Z_1 ... Z_{p-1} (X_p + iY_p)/2``."""
    _check_index(p, n)
    return _jw(p, n, +1)


def _as_overlap(S_so) -> np.ndarray:
    S = np.asarray(S_so, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError("overlap must be a square matrix")
    return S


def map_annihilation_no(p: int, S_so) -> PauliSum:
    """``sum_q S_pq Z_1 ... Z_{q-1} (X_q + iY_q)/2``."""
    S = _as_overlap(S_so)
    n = S.shape[0]
    _check_index(p, n)
    return linear_combination(
        n, ((S[p - 1, q], map_annihilation_canonical(q + 1, n)) for q in range(n))
    )


def map_op(op: FermionOp, S_so) -> PauliSum:
    S = _as_overlap(S_so)
    n = S.shape[0]
    if op.kind is OpKind.CREATE:
        return map_creation(op.index, n)
    if op.kind is OpKind.ANNIHILATE_ADJOINT:
        return map_annihilation_no(op.index, S)
    return map_annihilation_canonical(op.index, n)


def map_operator_string(ops: Sequence[FermionOp], S_so, prune_tol: float = DEFAULT_PRUNE_TOL) -> PauliSum:
    """Left-to-right product of the images of ``ops``."""
    if not ops:
        raise ValueError("operator string must be nonempty")
    out = map_op(ops[0], S_so)
    for op in ops[1:]:
        out = sum_mul(out, map_op(op, S_so), prune_tol)
    return out


# ---------------------------------------------------------------- Hamiltonian
class Scheme(str, Enum):
    RAW = "raw_nonorthogonal"
    BIORTH = "biorthogonal"


# Chosen by comparing both schemes against the Fock-space oracle; see
# scgvb.workflow.arbitrate_scheme and its test.
DEFAULT_SCHEME = Scheme.BIORTH


def chemist_to_physicist(g_chem: np.ndarray) -> np.ndarray:
    """``<pq|rs> = (pr|qs)``."""
    return np.ascontiguousarray(np.asarray(g_chem).transpose(0, 2, 1, 3))


@dataclass(frozen=True, eq=False)
class HamiltonianEncoding:
    """Qubit image of the electronic Hamiltonian (no nuclear repulsion).

    ``parts`` keeps the one- and two-body pieces separate so that they can be
    measured with separate circuit batches.  ``term_count`` is the number of
    Pauli products generated before like terms were merged.
    """

    scheme: Scheme
    parts: dict[str, PauliSum]
    term_count: int
    integrals: SpinOrbitalIntegrals = field(repr=False)
    h_eff: np.ndarray = field(repr=False)
    g_eff: np.ndarray = field(repr=False)

    @property
    def qubit_op(self) -> PauliSum:
        out = None
        for part in self.parts.values():
            out = part if out is None else out + part
        return out

    @property
    def n_qubits(self) -> int:
        return self.integrals.n_so

    def hermiticity_defect(self) -> float:
        op = self.qubit_op
        diff = op - op.adjoint()
        return float(np.max(np.abs(diff.coeffs))) if len(diff) else 0.0


def effective_integrals(integrals: SpinOrbitalIntegrals, scheme: Scheme) -> tuple[np.ndarray, np.ndarray]:
    """(h, g) entering ``sum h a+ A + 1/2 sum g a+ a+ A A`` (g in physicist order)."""
    h = integrals.h_so
    g = chemist_to_physicist(integrals.g_so)
    if Scheme(scheme) is Scheme.RAW:
        return h.copy(), g
    S = integrals.S_so
    if np.min(np.linalg.eigvalsh(S)) <= 0:
        raise ValueError("overlap is singular; biorthogonal scheme unavailable")
    Sinv = np.linalg.inv(S)
    return Sinv @ h, np.einsum("px,qy,xyrs->pqrs", Sinv, Sinv, g, optimize=True)


def _sparsify(a: np.ndarray) -> np.ndarray:
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    return np.where(np.abs(a) <= 1e-14 * scale, 0.0, a)


def map_hamiltonian(
    integrals: SpinOrbitalIntegrals,
    scheme: Scheme | str = DEFAULT_SCHEME,
    prune_tol: float = DEFAULT_PRUNE_TOL,
) -> HamiltonianEncoding:
    scheme = Scheme(scheme)
    n = integrals.n_so
    h, g = effective_integrals(integrals, scheme)
    h, g = _sparsify(h), _sparsify(g)
    S = integrals.S_so
    cre = [map_creation(p, n) for p in range(1, n + 1)]
    if scheme is Scheme.RAW:
        ann = [map_annihilation_no(p, S) for p in range(1, n + 1)]
    else:
        ann = [map_annihilation_canonical(p, n) for p in range(1, n + 1)]
    n_cre = np.array([len(c) for c in cre])
    n_ann = np.array([len(a) for a in ann])

    one = linear_combination(
        n,
        (
            (1.0, sum_mul(cre[p], linear_combination(n, ((h[p, q], ann[q]) for q in range(n))), prune_tol))
            for p in range(n)
        ),
        prune_tol,
    )
    count = int(np.sum((h != 0) * np.outer(n_cre, n_ann)))

    # a_s a_r for every (r, s); the r-major layout matches g[p, q, r, s]
    ann_pairs = [[sum_mul(ann[s], ann[r], 0.0) for s in range(n)] for r in range(n)]
    pieces = []
    for p in range(n):
        for q in range(n):
            block = g[p, q]
            if not np.any(block):
                continue
            inner = linear_combination(
                n,
                ((0.5 * block[r, s], ann_pairs[r][s]) for r in range(n) for s in range(n) if block[r, s]),
                0.0,
            )
            pieces.append((1.0, sum_mul(sum_mul(cre[p], cre[q], 0.0), inner, 0.0)))
            count += int(n_cre[p] * n_cre[q] * np.sum((block != 0) * np.outer(n_ann, n_ann)))
    two = linear_combination(n, pieces, prune_tol)
    return HamiltonianEncoding(scheme, {"one_body": one, "two_body": two}, count, integrals, h, g)
