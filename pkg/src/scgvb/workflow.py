"""End-to-end evaluation of determinant matrices for one geometry."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .analysis import SpectralSolution, WeightReport, all_weights, solve_generalized
from .estimators import (
    EstimatorConfig,
    EstimatorResult,
    PghePlan,
    doe_overlap,
    evaluate_plan,
)
from .integrals import Geometry, MolecularIntegrals, build_integrals, h4_rectangle, to_spin_orbitals
from .nojw import DEFAULT_SCHEME, HamiltonianEncoding, Scheme, map_hamiltonian
from .oracle import FockOracle, lowdin_matrices
from .structures import StructureBasis, contract_to_structures, h4_basis

# Two-electron scale that reproduces the H4 reference tables.
TABLE_TWO_BODY_SCALE = 2.0
CONVENTIONS = {"tables": TABLE_TWO_BODY_SCALE, "textbook": 1.0}

# Geometries of the H4 -> 2 H2 scan, (side_12, side_23) in Angstrom.
H4_SCAN = ((0.7414, 0.7414), (0.88, 0.7414), (0.92675, 0.7414), (1.2, 0.7414), (1.26, 0.7414))

THREADS_ENV = "SCGVB_THREADS"


def thread_count(default: int = 1) -> int:
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return default
    n = int(raw)
    if n < 1:
        raise ValueError(f"{THREADS_ENV} must be a positive integer")
    return n


def _pmap(fn, items, threads: int):
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def unique_pairs(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i, n)]


@dataclass(eq=False)
class DeterminantProblem:
    """Integrals, determinant basis and Hamiltonian encoding for one geometry."""

    integrals: MolecularIntegrals
    basis: StructureBasis = field(default_factory=h4_basis)
    two_body_scale: float = 1.0
    scheme: Scheme = DEFAULT_SCHEME
    label: str = ""

    def __post_init__(self) -> None:
        self.scheme = Scheme(self.scheme)
        self._plans: dict[tuple[int, int], PghePlan] = {}

    @classmethod
    def h4(cls, side_12: float, side_23: float = 0.7414, **kw) -> DeterminantProblem:
        kw.setdefault("label", f"{side_12:g}x{side_23:g}")
        return cls(build_integrals(h4_rectangle(side_12, side_23)), **kw)

    @classmethod
    def from_geometry(cls, geometry: Geometry, basis_name: str = "sto-3g", **kw) -> DeterminantProblem:
        return cls(build_integrals(geometry, basis_name), **kw)

    @cached_property
    def spin_integrals(self):
        return to_spin_orbitals(self.integrals, self.two_body_scale)

    @property
    def dets(self):
        return self.basis.determinants

    @cached_property
    def encoding(self) -> HamiltonianEncoding:
        return map_hamiltonian(self.spin_integrals, self.scheme)

    @cached_property
    def f_sums(self):
        return [d.creation_sum() for d in self.dets]

    @cached_property
    def w_sums(self):
        return [d.annihilation_sum(self.spin_integrals.S_so) for d in self.dets]

    # -- references ------------------------------------------------------
    @cached_property
    def lowdin(self) -> tuple[np.ndarray, np.ndarray]:
        return lowdin_matrices(self.dets, self.spin_integrals)

    @cached_property
    def fock(self) -> tuple[np.ndarray, np.ndarray]:
        return FockOracle(self.spin_integrals).matrices(self.dets)

    def reference(self, kind: str = "lowdin") -> tuple[np.ndarray, np.ndarray]:
        if kind == "lowdin":
            return self.lowdin
        if kind == "fock":
            return self.fock
        raise ValueError(f"unknown reference {kind!r}")

    # -- estimators ------------------------------------------------------
    def overlap_matrix(self, config: EstimatorConfig, threads: int = 1):
        n = len(self.dets)
        pairs = unique_pairs(n)
        results = _pmap(lambda ij: doe_overlap(self.f_sums[ij[1]], self.w_sums[ij[0]], config), pairs, threads)
        return _symmetric(n, pairs, results), results

    def plan(self, i: int, j: int) -> PghePlan:
        """Operator ``w_i H f_j`` and its measurement groups (cached)."""
        key = (i, j)
        if key not in self._plans:
            self._plans[key] = PghePlan.build(self.w_sums[i], self.encoding.parts, self.f_sums[j])
        return self._plans[key]

    def hamiltonian_matrix(self, config: EstimatorConfig, threads: int = 1):
        n = len(self.dets)
        pairs = unique_pairs(n)
        self.encoding  # build once before fanning out
        self.f_sums, self.w_sums

        def task(ij):
            return evaluate_plan(self.plan(*ij), config, stream=ij)

        results = _pmap(task, pairs, threads)
        return _symmetric(n, pairs, results), results

    # -- structures -------------------------------------------------------
    def structure_analysis(self, S: np.ndarray, H: np.ndarray) -> StructureAnalysis:
        Ss = contract_to_structures(S, self.basis)
        Hs = contract_to_structures(H, self.basis)
        sol = solve_generalized(Hs, Ss)
        return StructureAnalysis(Ss, Hs, sol, all_weights(sol.ground, Ss), self.integrals.e_nuc)


def _symmetric(n, pairs, results: list[EstimatorResult]) -> np.ndarray:
    M = np.zeros((n, n))
    for (i, j), r in zip(pairs, results):
        M[i, j] = M[j, i] = r.value
    return M


@dataclass(frozen=True, eq=False)
class StructureAnalysis:
    S: np.ndarray
    H: np.ndarray
    solution: SpectralSolution
    weights: WeightReport
    e_nuc: float

    @property
    def ground_energy(self) -> float:
        """Electronic ground-state energy plus nuclear repulsion."""
        return float(self.solution.energies[0]) + self.e_nuc


# ---------------------------------------------------------------- arbitration
def arbitrate_scheme(integrals: MolecularIntegrals, two_body_scale: float = 1.0, tol: float = 1e-8) -> dict:
    """Evaluate both encodings in exact mode against the Fock oracle.

    Returns the maximum deviation per scheme and the scheme that stays within
    ``tol`` (``None`` if neither does).
    """
    devs = {}
    for scheme in Scheme:
        prob = DeterminantProblem(integrals, two_body_scale=two_body_scale, scheme=scheme)
        H, _ = prob.hamiltonian_matrix(EstimatorConfig())
        devs[scheme.value] = float(np.max(np.abs(H - prob.fock[1])))
    ok = [s for s, d in devs.items() if d <= tol]
    return {"max_deviation": devs, "selected": min(ok, key=devs.get) if ok else None}


# ---------------------------------------------------------------- deviations
@dataclass(frozen=True, eq=False)
class DeviationSummary:
    abs_dev: np.ndarray
    mean_unique: float
    rms_unique: float
    mean_full: float
    rms_full: float
    max: float
    argmax: tuple[int, int]  # 1-based, i <= j

    def to_dict(self) -> dict:
        return {
            "mean_unique": self.mean_unique,
            "rms_unique": self.rms_unique,
            "mean_full": self.mean_full,
            "rms_full": self.rms_full,
            "max": self.max,
            "argmax": list(self.argmax),
        }


def compare_tables(computed, reference) -> DeviationSummary:
    A = np.asarray(computed, dtype=float)
    B = np.asarray(reference, dtype=float)
    if A.shape != B.shape or A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"shape mismatch: {A.shape} vs {B.shape}")
    d = np.abs(A - B)
    iu = np.triu_indices(A.shape[0])
    u = d[iu]
    k = int(np.argmax(u))
    return DeviationSummary(
        abs_dev=d,
        mean_unique=float(u.mean()),
        rms_unique=float(np.sqrt(np.mean(u**2))),
        mean_full=float(d.mean()),
        rms_full=float(np.sqrt(np.mean(d**2))),
        max=float(d.max()),
        argmax=(int(iu[0][k]) + 1, int(iu[1][k]) + 1),
    )
