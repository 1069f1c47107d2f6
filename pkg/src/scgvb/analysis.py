"""Generalized eigenproblem in a nonorthogonal basis and structure weights."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

LINDEP_TOL = 1e-8


class LinearDependenceError(ValueError):
    pass


def jacobi_eigh(A, tol: float = 1e-14, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi diagonalization of a real symmetric matrix.

    Returns ascending eigenvalues and orthonormal eigenvectors (columns).
    """
    A = np.array(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    if n and np.max(np.abs(A - A.T)) > 1e-10 * max(1.0, np.max(np.abs(A))):
        raise ValueError("matrix is not symmetric")
    A = 0.5 * (A + A.T)
    V = np.eye(n)
    scale = max(np.linalg.norm(A), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(A, -1) ** 2))
        if off < tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1)) if theta else 1.0
                c = 1 / np.sqrt(t * t + 1)
                s = t * c
                # rotate rows/columns p and q
                Ap, Aq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * Ap - s * Aq
                A[:, q] = s * Ap + c * Aq
                Ap, Aq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * Ap - s * Aq
                A[q, :] = s * Ap + c * Aq
                Vp, Vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * Vp - s * Vq
                V[:, q] = s * Vp + c * Vq
    else:
        raise ArithmeticError("Jacobi iteration did not converge")
    w = np.diag(A).copy()
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


def _spectral(S, lindep_tol: float):
    w, V = jacobi_eigh(S)
    if w.size and w[0] < lindep_tol:
        raise LinearDependenceError(
            f"overlap eigenvalue {w[0]:.3e} below {lindep_tol:g}: near-linear dependency in the basis"
        )
    return w, V


def inverse_sqrt(S, lindep_tol: float = LINDEP_TOL) -> np.ndarray:
    """Symmetric ``S^-1/2``."""
    w, V = _spectral(S, lindep_tol)
    return (V / np.sqrt(w)) @ V.T


def matrix_sqrt(S, lindep_tol: float = LINDEP_TOL) -> np.ndarray:
    w, V = _spectral(S, lindep_tol)
    return (V * np.sqrt(w)) @ V.T


@dataclass(frozen=True, eq=False)
class SpectralSolution:
    energies: np.ndarray  # ascending
    C: np.ndarray  # columns, C^T S C = 1
    C_orth: np.ndarray
    X: np.ndarray  # S^-1/2
    min_overlap_eigenvalue: float

    @property
    def ground(self) -> np.ndarray:
        return self.C[:, 0]


def _fix_sign(c: np.ndarray) -> np.ndarray:
    # largest |c| positive; near-ties go to the last index
    mags = np.abs(c)
    k = np.flatnonzero(mags >= mags.max() - 1e-9 * max(mags.max(), 1.0))[-1]
    return -c if c[k] < 0 else c


def solve_generalized(H, S, lindep_tol: float = LINDEP_TOL) -> SpectralSolution:
    H = np.asarray(H, dtype=float)
    S = np.asarray(S, dtype=float)
    if H.shape != S.shape:
        raise ValueError("H and S shapes differ")
    w, V = _spectral(S, lindep_tol)
    X = (V / np.sqrt(w)) @ V.T
    Hp = X.T @ H @ X
    E, Cp = jacobi_eigh(0.5 * (Hp + Hp.T))
    C = X @ Cp
    for k in range(C.shape[1]):
        C[:, k] = _fix_sign(C[:, k] / np.sqrt(C[:, k] @ S @ C[:, k]))
    Cp = ((V * np.sqrt(w)) @ V.T) @ C
    return SpectralSolution(E, C, Cp, X, float(w[0]) if w.size else 0.0)


@dataclass(frozen=True)
class WeightReport:
    cc: tuple[float, ...] = ()
    lowdin: tuple[float, ...] = ()
    inverse: tuple[float, ...] = ()

    @property
    def cc_out_of_range(self) -> tuple[bool, ...]:
        return tuple(not (-1e-12 <= w <= 1 + 1e-12) for w in self.cc)

    @property
    def sums(self) -> dict[str, float]:
        return {k: float(sum(getattr(self, k))) for k in ("cc", "lowdin", "inverse")}


def _normalized(C, S) -> np.ndarray:
    C = np.asarray(C, dtype=float)
    norm = float(C @ S @ C)
    if abs(norm - 1) > 1e-8:
        warnings.warn(f"coefficients not normalized (C^T S C = {norm:.6g}); renormalizing", stacklevel=3)
        C = C / np.sqrt(norm)
    return C


def chirgwin_coulson(C, S) -> WeightReport:
    """``W_i = sum_j C_i C_j S_ij``."""
    S = np.asarray(S, dtype=float)
    C = _normalized(C, S)
    return WeightReport(cc=tuple(float(v) for v in C * (S @ C)))


def alternative_weights(C, S, lindep_tol: float = LINDEP_TOL) -> WeightReport:
    """Loewdin ``(S^1/2 C)_i^2`` and inverse-overlap weights."""
    S = np.asarray(S, dtype=float)
    C = _normalized(C, S)
    low = (matrix_sqrt(S, lindep_tol) @ C) ** 2
    Sinv = inverse_sqrt(S, lindep_tol)
    Sinv = Sinv @ Sinv
    raw = C**2 / np.diag(Sinv)
    inv = raw / raw.sum()
    return WeightReport(lowdin=tuple(float(v) for v in low), inverse=tuple(float(v) for v in inv))


def all_weights(C, S) -> WeightReport:
    a = chirgwin_coulson(C, S)
    b = alternative_weights(C, S)
    return WeightReport(a.cc, b.lowdin, b.inverse)
