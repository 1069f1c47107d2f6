"""Emulated measurement-only estimators.

Every circuit acts on ``|0...0>`` with at most two single-qubit gates per
qubit, so the measured state is a product state and its outcome distribution
is computed per qubit.  Sampling draws multinomial counts from that
distribution with a counter-based generator keyed by the circuit's stream id,
which makes results independent of evaluation order.
"""

from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .pauli import DEFAULT_PRUNE_TOL, PauliSum, PauliTerm, _product_arrays, sum_mul

MAX_DEPTH = 2
_MASK64 = (1 << 64) - 1


class Gate(str, Enum):
    X = "x"
    Y = "y"
    Z = "z"
    H = "h"
    SDG = "sdg"


_UNITARY = {
    Gate.X: np.array([[0, 1], [1, 0]], dtype=complex),
    Gate.Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    Gate.Z: np.array([[1, 0], [0, -1]], dtype=complex),
    Gate.H: np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    Gate.SDG: np.array([[1, 0], [0, -1j]], dtype=complex),
}
_PAULI_GATE = {"X": Gate.X, "Y": Gate.Y, "Z": Gate.Z}
# basis change taking each letter's eigenbasis to the Z basis (applied in order)
_ROTATION = {"I": (), "Z": (), "X": (Gate.H,), "Y": (Gate.SDG, Gate.H)}


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class ShallowCircuit:
    """Single-qubit gates per qubit (applied left to right), then a full Z measurement."""

    n_qubits: int
    gates: tuple[tuple[Gate, ...], ...]

    def __post_init__(self) -> None:
        if len(self.gates) != self.n_qubits:
            raise CircuitError("one gate list per qubit required")
        gates = tuple(tuple(Gate(g) for g in q) for q in self.gates)
        object.__setattr__(self, "gates", gates)
        if self.depth > MAX_DEPTH:
            raise CircuitError(f"circuit depth {self.depth} exceeds {MAX_DEPTH}")

    @property
    def depth(self) -> int:
        return max((len(g) for g in self.gates), default=0)

    @property
    def n_multi_qubit_gates(self) -> int:
        return 0  # only single-qubit gates are representable

    def gate_counts(self) -> Counter:
        return Counter(g.value for q in self.gates for g in q)

    @classmethod
    def identity(cls, n: int) -> ShallowCircuit:
        return cls(n, ((),) * n)

    @classmethod
    def pauli_pair(cls, first: PauliTerm, second: PauliTerm) -> ShallowCircuit:
        """Apply ``first`` then ``second`` (letters only; phases tracked elsewhere)."""
        n = first.n_qubits
        gates = []
        for q in range(1, n + 1):
            seq = tuple(_PAULI_GATE[t.letter(q)] for t in (first, second) if t.letter(q) != "I")
            gates.append(seq)
        return cls(n, tuple(gates))

    @classmethod
    def basis_rotation(cls, letters: str) -> ShallowCircuit:
        return cls(len(letters), tuple(_ROTATION[ch] for ch in letters))

    def qubit_probabilities(self) -> np.ndarray:
        """Probability of reading 1 on each qubit."""
        out = np.empty(self.n_qubits)
        for q, seq in enumerate(self.gates):
            v = np.array([1, 0], dtype=complex)
            for g in seq:
                v = _UNITARY[g] @ v
            out[q] = abs(v[1]) ** 2
        return out


# ---------------------------------------------------------------- sampling
def _rng(seed: int, stream: Sequence[int]) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed) & _MASK64, *[int(s) & _MASK64 for s in stream]])
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True, eq=False)
class Distribution:
    """Outcome masks (bit q-1 = qubit q) with counts or probabilities."""

    n_qubits: int
    outcomes: np.ndarray
    weights: np.ndarray
    shots: int | None  # None for an exact distribution

    def frequencies(self) -> np.ndarray:
        return self.weights / self.shots if self.shots else self.weights

    def as_dict(self) -> dict[str, float]:
        n = self.n_qubits
        return {
            "".join(str((int(b) >> q) & 1) for q in range(n)): (w.item() if hasattr(w, "item") else w)
            for b, w in zip(self.outcomes, self.weights)
            if w
        }

    def prob_zero(self) -> float:
        hit = self.outcomes == 0
        return float(self.frequencies()[hit].sum()) if hit.any() else 0.0


def _outcome_table(p1: np.ndarray):
    tol = 1e-15
    fixed = sum(1 << q for q, p in enumerate(p1) if p > 1 - tol)
    free = [q for q, p in enumerate(p1) if tol <= p <= 1 - tol]
    k = len(free)
    idx = np.arange(1 << k)
    outcomes = np.full(1 << k, fixed, dtype=np.uint64)
    probs = np.ones(1 << k)
    for j, q in enumerate(free):
        bit = (idx >> j) & 1
        outcomes |= (bit.astype(np.uint64) << np.uint64(q))
        probs *= np.where(bit, p1[q], 1 - p1[q])
    return outcomes, probs


def sample_bitstrings(
    circuit: ShallowCircuit, shots: int | None, seed: int = 0, stream: Sequence[int] = ()
) -> Distribution:
    """Outcome distribution of ``circuit`` on ``|0...0>``.

    ``shots=None`` returns the exact distribution.  Otherwise counts are drawn
    from a Philox stream keyed by ``(seed, *stream)``.
    """
    outcomes, probs = _outcome_table(circuit.qubit_probabilities())
    if shots is None:
        return Distribution(circuit.n_qubits, outcomes, probs, None)
    if shots < 1:
        raise ValueError("shots must be positive")
    if outcomes.size == 1:
        return Distribution(circuit.n_qubits, outcomes, np.array([shots]), shots)
    counts = _rng(seed, stream).multinomial(shots, probs / probs.sum())
    return Distribution(circuit.n_qubits, outcomes, counts, shots)


def eigenvalue_from_bitstring(term: PauliTerm, outcome: str | int) -> int:
    """Parity of the outcome bits on the term's support (+1 even, -1 odd)."""
    if isinstance(outcome, str):
        if len(outcome) != term.n_qubits:
            raise ValueError("outcome length does not match the register")
        outcome = sum(1 << q for q, ch in enumerate(outcome) if ch == "1")
    return -1 if (int(outcome) & term.support).bit_count() % 2 else 1


# ---------------------------------------------------------------- config / results
class Mode(str, Enum):
    EXACT = "exact"
    SAMPLED = "sampled"


@dataclass(frozen=True)
class EstimatorConfig:
    mode: Mode = Mode.EXACT
    shots: int = 524288
    seed: int = 0
    prune_tol: float = DEFAULT_PRUNE_TOL

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.mode is Mode.SAMPLED and self.shots < 1:
            raise ValueError("sampled mode needs shots >= 1")
        if self.prune_tol < 0:
            raise ValueError("prune_tol must be nonnegative")


@dataclass
class EstimatorResult:
    value: float
    raw_complex: complex
    n_circuits: int = 0
    n_measurements: int = 0
    gate_counts: dict[str, int] = field(default_factory=dict)
    max_depth: int = 0
    depth_sum: int = 0
    n_multi_qubit_gates: int = 0
    wall_time: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    @property
    def mean_depth(self) -> float:
        return self.depth_sum / self.n_circuits if self.n_circuits else 0.0


def _gate_totals(circuits: Iterable[ShallowCircuit]) -> tuple[dict, int, int, int]:
    counts: Counter = Counter()
    max_d = sum_d = n = 0
    for c in circuits:
        counts.update(c.gate_counts())
        d = c.depth
        max_d = max(max_d, d)
        sum_d += d
        n += 1
    return dict(counts), max_d, sum_d, n


# ---------------------------------------------------------------- DOE
def _terms(op: PauliSum) -> list[tuple[PauliTerm, complex]]:
    return list(op)


def doe_overlap(f: PauliSum, w: PauliSum, config: EstimatorConfig = EstimatorConfig()) -> EstimatorResult:
    """``<vac| w f |vac>`` from Pauli-pair circuits.

    Each pair ``(Q in f, P in w)`` gives the circuit "apply Q, apply P,
    measure".  Its all-zero probability is 0 or 1; the phase of ``P Q`` is
    tracked classically.
    """
    if f.n_qubits != w.n_qubits:
        raise ValueError(f"register mismatch: {f.n_qubits} vs {w.n_qubits}")
    t0 = time.perf_counter()
    n = f.n_qubits
    # all pair products at once: rows follow w, columns follow f
    x, z, c = _product_arrays(w.x_masks, w.z_masks, w.coeffs, f.x_masks, f.z_masks, f.coeffs)
    closed = x == 0  # product maps |0> back to |0>, so p_ab = 1
    if config.mode is Mode.EXACT:
        p_ab = closed.astype(float)
    else:
        # each pair circuit is a point mass; draw it anyway so the accounting is honest
        p_ab = np.empty(x.size)
        fx, fz = f.x_masks, f.z_masks
        k = 0
        for Pw, _ in w:
            for a in range(len(f)):
                Q = PauliTerm(n, int(fx[a]), int(fz[a]))
                dist = sample_bitstrings(ShallowCircuit.pauli_pair(Q, Pw), config.shots, config.seed, (k,))
                p_ab[k] = dist.prob_zero()
                k += 1
    raw = complex(np.sum(c * p_ab))
    # gate and depth accounting (vectorized: one gate per non-identity letter)
    sw = (w.x_masks | w.z_masks)[:, None]
    sf = (f.x_masks | f.z_masks)[None, :]
    n_gates = np.bitwise_count(sw).astype(np.int64) + np.bitwise_count(sf)
    depth = np.where((sw & sf) != 0, 2, np.where((sw | sf) != 0, 1, 0))
    n_circ = int(x.size)
    counts = _pauli_gate_counts(w, f)
    return EstimatorResult(
        value=raw.real,
        raw_complex=raw,
        n_circuits=n_circ,
        n_measurements=n_circ * config.shots * n,
        gate_counts=counts,
        max_depth=int(depth.max()) if n_circ else 0,
        depth_sum=int(depth.sum()),
        wall_time=time.perf_counter() - t0,
        diagnostics={"n_pairs": n_circ, "n_closed": int(closed.sum()), "n_gates": int(n_gates.sum())},
    )


def _pauli_gate_counts(w: PauliSum, f: PauliSum) -> dict[str, int]:
    def per_letter(op):
        x, z = op.x_masks, op.z_masks
        return {
            "x": np.bitwise_count(x & ~z).astype(np.int64),
            "y": np.bitwise_count(x & z).astype(np.int64),
            "z": np.bitwise_count(~x & z).astype(np.int64),
        }

    a, b = per_letter(w), per_letter(f)
    return {
        k: int(a[k].sum() * len(f) + b[k].sum() * len(w)) for k in ("x", "y", "z")
    }


# ---------------------------------------------------------------- grouping
@dataclass(frozen=True, eq=False)
class MeasurementGroup:
    n_qubits: int
    x_masks: np.ndarray
    z_masks: np.ndarray
    coeffs: np.ndarray
    x_union: int
    z_union: int

    @property
    def members(self) -> list[PauliTerm]:
        return [PauliTerm(self.n_qubits, int(x), int(z)) for x, z in zip(self.x_masks, self.z_masks)]

    @property
    def rotation_letters(self) -> str:
        n = self.n_qubits
        return PauliTerm(n, self.x_union, self.z_union).label

    @property
    def circuit(self) -> ShallowCircuit:
        return ShallowCircuit.basis_rotation(self.rotation_letters)

    def __len__(self) -> int:
        return int(self.coeffs.size)


def group_qwc(terms: PauliSum) -> list[MeasurementGroup]:
    """Greedy first fit in descending ``|coeff|`` (ties keep term-key order)."""
    n = terms.n_qubits
    order = np.argsort(-np.abs(terms.coeffs), kind="stable")
    xs, zs = terms.x_masks[order], terms.z_masks[order]
    cap = max(16, len(order))
    gx = np.zeros(cap, dtype=np.uint64)
    gz = np.zeros(cap, dtype=np.uint64)
    gs = np.zeros(cap, dtype=np.uint64)
    assign = np.empty(len(order), dtype=np.int64)
    n_groups = 0
    for t in range(len(order)):
        x, z = xs[t], zs[t]
        s = x | z
        clash = (((x ^ gx[:n_groups]) | (z ^ gz[:n_groups])) & s & gs[:n_groups]) != 0
        hit = np.flatnonzero(~clash)
        g = int(hit[0]) if hit.size else n_groups
        if g == n_groups:
            n_groups += 1
        gx[g] |= x
        gz[g] |= z
        gs[g] |= s
        assign[t] = g
    groups = []
    cs = terms.coeffs[order]
    for g in range(n_groups):
        sel = np.flatnonzero(assign == g)
        groups.append(
            MeasurementGroup(n, xs[sel], zs[sel], cs[sel], int(gx[g]), int(gz[g]))
        )
    return groups


# ---------------------------------------------------------------- PGHE
@dataclass(frozen=True, eq=False)
class PghePlan:
    """Seed-independent part of a Hamiltonian element: the operator and its groups."""

    n_qubits: int
    parts: dict[str, PauliSum]
    groups: dict[str, list[MeasurementGroup]]

    @classmethod
    def build(cls, w: PauliSum, H_parts: dict[str, PauliSum], f: PauliSum, prune_tol=DEFAULT_PRUNE_TOL) -> PghePlan:
        parts = {}
        for name, op in H_parts.items():
            if not (w.n_qubits == op.n_qubits == f.n_qubits):
                raise ValueError("register mismatch between w, H and f")
            parts[name] = sum_mul(w, sum_mul(op, f, prune_tol), prune_tol)
        return cls(w.n_qubits, parts, {k: group_qwc(v) for k, v in parts.items()})

    @property
    def n_circuits(self) -> int:
        return sum(len(g) for g in self.groups.values())


def _group_expectations(group: MeasurementGroup, dist: Distribution) -> np.ndarray:
    supp = (group.x_masks | group.z_masks)[None, :]
    parity = np.bitwise_count(dist.outcomes[:, None] & supp) & 1
    lam = 1.0 - 2.0 * parity
    return dist.frequencies() @ lam


HERMITICITY_TOL = 1e-9


def evaluate_plan(plan: PghePlan, config: EstimatorConfig, stream: Sequence[int] = ()) -> EstimatorResult:
    t0 = time.perf_counter()
    n = plan.n_qubits
    total = 0j
    per_part = {}
    circuits = []
    for part_id, (name, groups) in enumerate(plan.groups.items()):
        acc = 0j
        for g_id, group in enumerate(groups):
            circ = group.circuit
            circuits.append(circ)
            if config.mode is Mode.EXACT:
                ev = (group.x_masks == 0).astype(float)
            else:
                dist = sample_bitstrings(circ, config.shots, config.seed, (*stream, part_id, g_id))
                ev = _group_expectations(group, dist)
            acc += complex(group.coeffs @ ev)
        per_part[name] = acc
        total += acc
    if config.mode is Mode.EXACT and abs(total.imag) > HERMITICITY_TOL:
        raise ArithmeticError(f"imaginary residue {total.imag:.3e} in an exact matrix element")
    counts, max_d, sum_d, n_circ = _gate_totals(circuits)
    return EstimatorResult(
        value=total.real,
        raw_complex=total,
        n_circuits=n_circ,
        n_measurements=n_circ * config.shots * n,
        gate_counts=counts,
        max_depth=max_d,
        depth_sum=sum_d,
        wall_time=time.perf_counter() - t0,
        diagnostics={
            "parts": {k: v.real for k, v in per_part.items()},
            "circuits_per_part": {k: len(v) for k, v in plan.groups.items()},
            "terms_per_part": {k: len(v) for k, v in plan.parts.items()},
        },
    )


def pghe_matrix_element(
    w: PauliSum, H, f: PauliSum, config: EstimatorConfig = EstimatorConfig(), stream: Sequence[int] = ()
) -> EstimatorResult:
    """``<vac| w H f |vac>`` from grouped Pauli measurements.

    ``H`` may be a HamiltonianEncoding (its one- and two-body parts are
    measured as separate batches), a dict of named PauliSums, or a PauliSum.
    """
    if isinstance(H, PauliSum):
        parts = {"operator": H}
    elif isinstance(H, dict):
        parts = H
    else:
        parts = H.parts
    plan = PghePlan.build(w, parts, f, config.prune_tol)
    return evaluate_plan(plan, config, stream)


# ---------------------------------------------------------------- resources
def resource_report(results: Sequence[EstimatorResult]) -> dict:
    gates: Counter = Counter()
    n_circ = n_meas = depth_sum = max_d = multi = 0
    wall = 0.0
    for r in results:
        gates.update(r.gate_counts)
        n_circ += r.n_circuits
        n_meas += r.n_measurements
        depth_sum += r.depth_sum
        max_d = max(max_d, r.max_depth)
        multi += r.n_multi_qubit_gates
        wall += r.wall_time
    total_gates = sum(gates.values())
    return {
        "n_circuits": n_circ,
        "n_measurements": n_meas,
        "gate_counts": dict(sorted(gates.items())),
        "total_gates": total_gates,
        "mean_gates_per_circuit": total_gates / n_circ if n_circ else 0.0,
        "max_depth": max_d,
        "mean_depth": depth_sum / n_circ if n_circ else 0.0,
        "n_multi_qubit_gates": multi,
        "wall_time": wall,
    }
