import itertools

import numpy as np

from scgvb.integrals import MolecularIntegrals, to_spin_orbitals
from scgvb.structures import Determinant


def random_spd(rng, n, jitter=0.3):
    """Random SPD matrix with unit diagonal."""
    A = np.eye(n) + jitter * rng.standard_normal((n, n))
    S = A @ A.T
    d = np.sqrt(np.diag(S))
    return S / np.outer(d, d)


def random_integrals(rng, m) -> MolecularIntegrals:
    """Random real integrals with the usual 8-fold symmetry and an SPD overlap."""
    S = random_spd(rng, m)
    h = rng.standard_normal((m, m))
    h = 0.5 * (h + h.T)
    # g = sum_k L_k (x) L_k keeps (pq|rs) = (rs|pq) and the pair symmetries
    L = rng.standard_normal((m + 1, m, m))
    L = 0.5 * (L + L.transpose(0, 2, 1))
    g = 0.3 * np.einsum("kpq,krs->pqrs", L, L)
    return MolecularIntegrals(S, h, g, 0.0)


def random_system(rng, m, two_body_scale=1.0):
    return to_spin_orbitals(random_integrals(rng, m), two_body_scale)


def random_determinant_pair(rng, n_so):
    n_el = int(rng.integers(1, n_so + 1))
    picks = [rng.permutation(np.arange(1, n_so + 1))[:n_el] for _ in range(2)]
    return [Determinant.from_electron_order(p.tolist(), n_so) for p in picks]


def slater_condon_diagonal(det, so):
    """Orthonormal-orbital diagonal element."""
    occ = [p - 1 for p in det.occupied]
    e = sum(so.h_so[p, p] for p in occ)
    for p, q in itertools.combinations(occ, 2):
        e += so.g_so[p, p, q, q] - so.g_so[p, q, q, p]
    return e
