"""Classical reference values for nonorthogonal determinants.

Two routes that share nothing but the integrals:

* cofactor (Loewdin) rules on the occupied-orbital overlap matrix;
* a brute-force Fock space built from Loewdin-orthonormalized orbitals, where
  the nonorthogonal creators are ``a+_p = sum_q a~+_q [S^1/2]_qp``.
"""

from __future__ import annotations

import itertools
from functools import cached_property

import numpy as np

from .integrals import SpinOrbitalIntegrals
from .structures import Determinant

FOCK_MAX_MODES = 14


def _check_pair(bra: Determinant, ket: Determinant) -> None:
    if bra.n_electrons != ket.n_electrons:
        raise ValueError(f"electron count mismatch: {bra.n_electrons} vs {ket.n_electrons}")
    if bra.n_so != ket.n_so:
        raise ValueError("register mismatch between determinants")


def occupied_overlap(bra: Determinant, ket: Determinant, S_so) -> np.ndarray:
    S = np.asarray(S_so, dtype=float)
    rows = np.array(bra.occupied) - 1
    cols = np.array(ket.occupied) - 1
    return S[np.ix_(rows, cols)]


def _det(a: np.ndarray) -> float:
    return float(np.linalg.det(a)) if a.size else 1.0


def _minor(O: np.ndarray, rows, cols) -> np.ndarray:
    r = [i for i in range(O.shape[0]) if i not in rows]
    c = [j for j in range(O.shape[1]) if j not in cols]
    return O[np.ix_(r, c)]


def lowdin_overlap(bra: Determinant, ket: Determinant, S_so) -> float:
    _check_pair(bra, ket)
    return bra.sign * ket.sign * _det(occupied_overlap(bra, ket, S_so))


def lowdin_matrix_element(bra: Determinant, ket: Determinant, integrals: SpinOrbitalIntegrals) -> float:
    """Electronic ``<bra|H|ket>`` from first and second cofactors of the overlap."""
    _check_pair(bra, ket)
    O = occupied_overlap(bra, ket, integrals.S_so)
    k = np.array(bra.occupied) - 1
    l = np.array(ket.occupied) - 1
    n = len(k)
    h, g = integrals.h_so, integrals.g_so
    one = 0.0
    for i in range(n):
        for j in range(n):
            if h[k[i], l[j]]:
                one += h[k[i], l[j]] * (-1) ** (i + j) * _det(_minor(O, (i,), (j,)))
    two = 0.0
    for i, ii in itertools.combinations(range(n), 2):
        for j, jj in itertools.combinations(range(n), 2):
            # <k_i k_ii || l_j l_jj> with chemist-order g
            v = g[k[i], l[j], k[ii], l[jj]] - g[k[i], l[jj], k[ii], l[j]]
            if v:
                two += v * (-1) ** (i + ii + j + jj) * _det(_minor(O, (i, ii), (j, jj)))
    return bra.sign * ket.sign * (one + two)


# ---------------------------------------------------------------- Fock space
class FockSpace:
    """Matrix-free Fock space over orthonormal modes (bit p of an index = mode p)."""

    def __init__(self, S_so):
        S = np.asarray(S_so, dtype=float)
        n = S.shape[0]
        if n > FOCK_MAX_MODES:
            raise ValueError(f"{n} modes exceeds the dense cap of {FOCK_MAX_MODES}")
        w, V = np.linalg.eigh(0.5 * (S + S.T))
        if w.min() <= 0:
            raise ValueError("overlap not positive definite")
        self.n = n
        self.dim = 1 << n
        self.S = S
        self.S_half = (V * np.sqrt(w)) @ V.T
        self.S_mhalf = (V / np.sqrt(w)) @ V.T
        idx = np.arange(self.dim)
        self._occ = [((idx >> p) & 1).astype(bool) for p in range(n)]
        self._sgn = [
            np.where(np.bitwise_count((idx & ((1 << p) - 1)).astype(np.uint64)) % 2, -1.0, 1.0)
            for p in range(n)
        ]

    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dim)
        v[0] = 1.0
        return v

    def annihilate(self, p: int, v: np.ndarray) -> np.ndarray:
        """Orthonormal-mode annihilator, 0-based ``p``."""
        out = np.zeros_like(v)
        src = np.nonzero(self._occ[p])[0]
        out[..., src ^ (1 << p)] = self._sgn[p][src] * v[..., src]
        return out

    def create(self, p: int, v: np.ndarray) -> np.ndarray:
        out = np.zeros_like(v)
        src = np.nonzero(~self._occ[p])[0]
        out[..., src | (1 << p)] = self._sgn[p][src] * v[..., src]
        return out

    def create_nonorthogonal(self, p: int, v: np.ndarray) -> np.ndarray:
        out = np.zeros_like(v)
        for q in range(self.n):
            c = self.S_half[q, p]
            if c:
                out += c * self.create(q, v)
        return out

    def annihilate_nonorthogonal(self, p: int, v: np.ndarray) -> np.ndarray:
        out = np.zeros_like(v)
        for q in range(self.n):
            c = self.S_half[q, p]
            if c:
                out += c * self.annihilate(q, v)
        return out

    def determinant(self, det: Determinant) -> np.ndarray:
        v = self.vacuum()
        for p in reversed(det.occupied):
            v = self.create_nonorthogonal(p - 1, v)
        return det.sign * v

    def dense(self, op: str, p: int) -> np.ndarray:
        """Dense matrix of one mode operator, for small checks."""
        fn = {
            "a": self.annihilate,
            "a+": self.create,
            "A": self.annihilate_nonorthogonal,
            "A+": self.create_nonorthogonal,
        }[op]
        return fn(p, np.eye(self.dim)).T


class FockHamiltonian:
    """Electronic Hamiltonian in the orthonormalized mode basis."""

    def __init__(self, integrals: SpinOrbitalIntegrals):
        self.space = FockSpace(integrals.S_so)
        X = self.space.S_mhalf
        self.h = X @ integrals.h_so @ X
        self.g = np.einsum("pqrs,pa,qb,rc,sd->abcd", integrals.g_so, X, X, X, X, optimize=True)

    def apply(self, v: np.ndarray) -> np.ndarray:
        sp = self.space
        n = sp.n
        out = np.zeros_like(v)
        singles = np.array([sp.annihilate(q, v) for q in range(n)])
        for p in range(n):
            out += sp.create(p, np.tensordot(self.h[p], singles, axes=1))
        # 1/2 sum (pq|rs) a+_p a+_r a_s a_q
        doubles = np.array([[sp.annihilate(s, singles[q]) for q in range(n)] for s in range(n)])
        y = np.einsum("pqrs,sqd->prd", self.g, doubles, optimize=True)
        for p in range(n):
            inner = np.zeros_like(v)
            for r in range(n):
                inner += sp.create(r, y[p, r])
            out += 0.5 * sp.create(p, inner)
        return out


class FockOracle:
    """Caches the Fock-space Hamiltonian and determinant vectors for one system."""

    def __init__(self, integrals: SpinOrbitalIntegrals):
        self.integrals = integrals

    @cached_property
    def hamiltonian(self) -> FockHamiltonian:
        return FockHamiltonian(self.integrals)

    @cached_property
    def space(self) -> FockSpace:
        return self.hamiltonian.space

    def vector(self, det: Determinant) -> np.ndarray:
        return self.space.determinant(det)

    def overlap(self, bra: Determinant, ket: Determinant) -> float:
        _check_pair(bra, ket)
        return float(self.vector(bra) @ self.vector(ket))

    def matrix_element(self, bra: Determinant, ket: Determinant) -> float:
        _check_pair(bra, ket)
        return float(self.vector(bra) @ self.hamiltonian.apply(self.vector(ket)))

    def matrices(self, dets) -> tuple[np.ndarray, np.ndarray]:
        V = np.array([self.vector(d) for d in dets])
        HV = np.array([self.hamiltonian.apply(v) for v in V])
        return V @ V.T, V @ HV.T


def fock_matrix_element(bra, ket, integrals: SpinOrbitalIntegrals, operator: str = "hamiltonian") -> float:
    oracle = FockOracle(integrals)
    if operator == "overlap":
        return oracle.overlap(bra, ket)
    if operator == "hamiltonian":
        return oracle.matrix_element(bra, ket)
    raise ValueError(f"unknown operator {operator!r}")


def lowdin_matrices(dets, integrals: SpinOrbitalIntegrals) -> tuple[np.ndarray, np.ndarray]:
    n = len(dets)
    S = np.empty((n, n))
    H = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            S[i, j] = S[j, i] = lowdin_overlap(dets[i], dets[j], integrals.S_so)
            H[i, j] = H[j, i] = lowdin_matrix_element(dets[i], dets[j], integrals)
    return S, H
