"""Phase-exact algebra of n-qubit Pauli strings.

Strings are stored in symplectic form: bit ``q - 1`` of ``x_mask`` and
``z_mask`` describes qubit ``q``.  The letter on a qubit is I, X, Y or Z for
``(x, z)`` equal to ``(0, 0)``, ``(1, 0)``, ``(1, 1)`` or ``(0, 1)``.  Text is
always rendered qubit 1 first.

:class:`PauliSum` keeps its terms in sorted numpy arrays so that products of
sums with tens of thousands of terms stay cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np

DEFAULT_PRUNE_TOL = 1e-12
MAX_QUBITS = 31

_LETTERS = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_BITS = {v: k for k, v in _LETTERS.items()}
_IPOW = np.array([1, 1j, -1, -1j], dtype=np.complex128)

# dense accumulation is used when 4**n stays below this
_DENSE_LIMIT = 1 << 20
_CHUNK = 1 << 22


def _check_n(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"n_qubits must be a positive integer, got {n!r}")
    if n > MAX_QUBITS:
        raise ValueError(f"at most {MAX_QUBITS} qubits supported, got {n}")


def _popcount(v: int) -> int:
    return int(v).bit_count()


@dataclass(frozen=True)
class PauliTerm:
    """A Pauli string ``i**phase_exp * P`` with P in letter form."""

    n_qubits: int
    x_mask: int
    z_mask: int
    phase_exp: int = 0

    def __post_init__(self) -> None:
        _check_n(self.n_qubits)
        full = (1 << self.n_qubits) - 1
        if self.x_mask & ~full or self.z_mask & ~full or self.x_mask < 0 or self.z_mask < 0:
            raise ValueError("mask has bits outside the register")
        object.__setattr__(self, "phase_exp", int(self.phase_exp) % 4)

    @classmethod
    def from_label(cls, label: str, phase_exp: int = 0) -> PauliTerm:
        """Build from letters ordered qubit 1 first, e.g. ``"XZI"``."""
        x = z = 0
        for q, ch in enumerate(label.upper()):
            try:
                bx, bz = _BITS[ch]
            except KeyError:
                raise ValueError(f"bad Pauli letter {ch!r}") from None
            x |= bx << q
            z |= bz << q
        return cls(len(label), x, z, phase_exp)

    @property
    def phase(self) -> complex:
        return complex(_IPOW[self.phase_exp])

    @property
    def label(self) -> str:
        return "".join(
            _LETTERS[((self.x_mask >> q) & 1, (self.z_mask >> q) & 1)] for q in range(self.n_qubits)
        )

    @property
    def support(self) -> int:
        return self.x_mask | self.z_mask

    def letter(self, q: int) -> str:
        """Letter on 1-based qubit ``q``."""
        return _LETTERS[((self.x_mask >> (q - 1)) & 1, (self.z_mask >> (q - 1)) & 1)]

    def to_dense(self) -> np.ndarray:
        return self.phase * _dense_string(self.n_qubits, self.x_mask, self.z_mask)

    def __str__(self) -> str:
        return f"{['+', '+i', '-', '-i'][self.phase_exp]}{self.label}"


def _mul_phase(x1: int, z1: int, x2: int, z2: int) -> int:
    # i^(x1.z1) X^x1 Z^z1 * i^(x2.z2) X^x2 Z^z2, rewritten in letter form
    x, z = x1 ^ x2, z1 ^ z2
    return (
        _popcount(x1 & z1) + _popcount(x2 & z2) + 2 * _popcount(z1 & x2) - _popcount(x & z)
    ) % 4


def pauli_mul(lhs: PauliTerm, rhs: PauliTerm) -> PauliTerm:
    """Exact product ``lhs @ rhs`` including the accumulated phase."""
    if lhs.n_qubits != rhs.n_qubits:
        raise ValueError(f"register mismatch: {lhs.n_qubits} vs {rhs.n_qubits}")
    k = _mul_phase(lhs.x_mask, lhs.z_mask, rhs.x_mask, rhs.z_mask)
    return PauliTerm(
        lhs.n_qubits,
        lhs.x_mask ^ rhs.x_mask,
        lhs.z_mask ^ rhs.z_mask,
        lhs.phase_exp + rhs.phase_exp + k,
    )


def qwc_compatible(lhs: PauliTerm, rhs: PauliTerm) -> bool:
    """True when on every qubit the letters agree or one of them is I."""
    if lhs.n_qubits != rhs.n_qubits:
        raise ValueError(f"register mismatch: {lhs.n_qubits} vs {rhs.n_qubits}")
    both = lhs.support & rhs.support
    return ((lhs.x_mask ^ rhs.x_mask) | (lhs.z_mask ^ rhs.z_mask)) & both == 0


def vacuum_amplitude(term: PauliTerm) -> complex:
    """``<0...0| P |0...0>``: the phase for I/Z strings, otherwise zero."""
    return term.phase if term.x_mask == 0 else 0j


_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _dense_string(n: int, x: int, z: int) -> np.ndarray:
    # qubit 1 is the leftmost tensor factor
    out = np.ones((1, 1), dtype=complex)
    for q in range(n):
        out = np.kron(out, _SINGLE[_LETTERS[((x >> q) & 1, (z >> q) & 1)]])
    return out


def _as_u64(values) -> np.ndarray:
    return np.asarray(values, dtype=np.uint64)


class PauliSum:
    """Sparse complex combination of Pauli strings (phases folded into coefficients).

    Instances are immutable.  Terms are kept sorted by ``(x_mask, z_mask)`` with
    no duplicates and no coefficient smaller than the prune tolerance used at
    construction.
    """

    __slots__ = ("n_qubits", "_x", "_z", "_c")

    def __init__(
        self,
        n_qubits: int,
        terms: Mapping[tuple[int, int], complex] | None = None,
        prune_tol: float = DEFAULT_PRUNE_TOL,
    ):
        _check_n(n_qubits)
        self.n_qubits = int(n_qubits)
        terms = dict(terms or {})
        x = _as_u64([k[0] for k in terms])
        z = _as_u64([k[1] for k in terms])
        c = np.array(list(terms.values()), dtype=np.complex128)
        full = (1 << n_qubits) - 1
        if x.size and (int(x.max()) > full or int(z.max()) > full):
            raise ValueError("mask has bits outside the register")
        self._x, self._z, self._c = _combine(self.n_qubits, x, z, c, prune_tol)

    @classmethod
    def _from_arrays(cls, n, x, z, c, prune_tol=DEFAULT_PRUNE_TOL, combined=False) -> PauliSum:
        obj = cls.__new__(cls)
        obj.n_qubits = n
        if combined:
            keep = np.abs(c) >= prune_tol if prune_tol > 0 else np.ones(c.shape, bool)
            obj._x, obj._z, obj._c = x[keep], z[keep], c[keep]
        else:
            obj._x, obj._z, obj._c = _combine(n, x, z, c, prune_tol)
        return obj

    @classmethod
    def from_term(cls, term: PauliTerm, coeff: complex = 1.0) -> PauliSum:
        return cls(term.n_qubits, {(term.x_mask, term.z_mask): coeff * term.phase})

    @classmethod
    def from_terms(
        cls, n_qubits: int, items: Iterable[tuple[PauliTerm | str, complex]], prune_tol=DEFAULT_PRUNE_TOL
    ) -> PauliSum:
        xs, zs, cs = [], [], []
        for t, c in items:
            if isinstance(t, str):
                t = PauliTerm.from_label(t)
            if t.n_qubits != n_qubits:
                raise ValueError("register mismatch")
            xs.append(t.x_mask)
            zs.append(t.z_mask)
            cs.append(complex(c) * t.phase)
        return cls._from_arrays(
            n_qubits, _as_u64(xs), _as_u64(zs), np.array(cs, dtype=np.complex128), prune_tol
        )

    @classmethod
    def identity(cls, n_qubits: int, coeff: complex = 1.0) -> PauliSum:
        return cls(n_qubits, {(0, 0): coeff})

    # --- views -----------------------------------------------------------
    @property
    def x_masks(self) -> np.ndarray:
        return self._x

    @property
    def z_masks(self) -> np.ndarray:
        return self._z

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def terms(self) -> dict[tuple[int, int], complex]:
        return {
            (int(x), int(z)): complex(c) for x, z, c in zip(self._x, self._z, self._c)
        }

    def __len__(self) -> int:
        return int(self._c.size)

    def __iter__(self) -> Iterator[tuple[PauliTerm, complex]]:
        for x, z, c in zip(self._x, self._z, self._c):
            yield PauliTerm(self.n_qubits, int(x), int(z)), complex(c)

    def coefficient(self, term: PauliTerm | str) -> complex:
        if isinstance(term, str):
            term = PauliTerm.from_label(term)
        hit = np.nonzero((self._x == term.x_mask) & (self._z == term.z_mask))[0]
        return complex(self._c[hit[0]]) / term.phase if hit.size else 0j

    # --- arithmetic ------------------------------------------------------
    def _check(self, other: PauliSum) -> None:
        if self.n_qubits != other.n_qubits:
            raise ValueError(f"register mismatch: {self.n_qubits} vs {other.n_qubits}")

    def __add__(self, other: PauliSum) -> PauliSum:
        if not isinstance(other, PauliSum):
            return NotImplemented
        self._check(other)
        return PauliSum._from_arrays(
            self.n_qubits,
            np.concatenate([self._x, other._x]),
            np.concatenate([self._z, other._z]),
            np.concatenate([self._c, other._c]),
        )

    def __neg__(self) -> PauliSum:
        return PauliSum._from_arrays(self.n_qubits, self._x, self._z, -self._c, combined=True)

    def __sub__(self, other: PauliSum) -> PauliSum:
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self + (-other)

    def scale(self, factor: complex, prune_tol: float = DEFAULT_PRUNE_TOL) -> PauliSum:
        return PauliSum._from_arrays(
            self.n_qubits, self._x, self._z, self._c * complex(factor), prune_tol, combined=True
        )

    def __mul__(self, other):
        if isinstance(other, PauliSum):
            return sum_mul(self, other)
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(other)
        return NotImplemented

    def __matmul__(self, other: PauliSum) -> PauliSum:
        return sum_mul(self, other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliSum):
            return NotImplemented
        return (
            self.n_qubits == other.n_qubits
            and np.array_equal(self._x, other._x)
            and np.array_equal(self._z, other._z)
            and np.array_equal(self._c, other._c)
        )

    __hash__ = None  # type: ignore[assignment]

    def allclose(self, other: PauliSum, atol: float = 1e-12) -> bool:
        diff = self - other
        return len(diff) == 0 or float(np.max(np.abs(diff._c))) <= atol

    def adjoint(self) -> PauliSum:
        return PauliSum._from_arrays(self.n_qubits, self._x, self._z, np.conj(self._c), combined=True)

    def vacuum_expectation(self) -> complex:
        """``<0^n| self |0^n>``, i.e. the sum of coefficients on I/Z strings."""
        return complex(self._c[self._x == 0].sum())

    def to_dense(self) -> np.ndarray:
        if self.n_qubits > 12:
            raise ValueError("dense conversion limited to 12 qubits")
        dim = 1 << self.n_qubits
        out = np.zeros((dim, dim), dtype=complex)
        for x, z, c in zip(self._x, self._z, self._c):
            out += c * _dense_string(self.n_qubits, int(x), int(z))
        return out

    # --- text ------------------------------------------------------------
    def render(self) -> str:
        """One line per term: ``±(re,im) <letters>`` with letters qubit 1 first.

        The leading sign is that of the first nonzero component; the pair holds
        the coefficient divided by that sign.
        """
        lines = []
        for t, c in self:
            lead = c.real if c.real != 0 else c.imag
            s = -1.0 if lead < 0 else 1.0
            v = c * s
            lines.append(f"{'-' if s < 0 else '+'}({v.real:.15g},{v.imag:.15g}) {t.label}")
        return "\n".join(lines)

    @classmethod
    def parse(cls, text: str) -> PauliSum:
        items = []
        n = None
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            coeff, letters = line.split()
            sign = -1.0 if coeff[0] == "-" else 1.0
            re, im = coeff[2:-1].split(",")
            items.append((letters, sign * complex(float(re), float(im))))
            n = len(letters)
        if n is None:
            raise ValueError("empty PauliSum text; register size unknown")
        return cls.from_terms(n, items, prune_tol=0.0)

    def __repr__(self) -> str:
        return f"PauliSum(n_qubits={self.n_qubits}, n_terms={len(self)})"


def _combine(n, x, z, c, prune_tol):
    """Merge duplicate masks, drop small coefficients, return sorted arrays."""
    if c.size == 0:
        return _as_u64([]), _as_u64([]), np.zeros(0, np.complex128)
    key = (x << np.uint64(n)) | z
    if (1 << (2 * n)) <= _DENSE_LIMIT:
        size = 1 << (2 * n)
        k = key.astype(np.int64)
        acc = np.bincount(k, weights=c.real, minlength=size) + 1j * np.bincount(
            k, weights=c.imag, minlength=size
        )
        ukey = np.unique(k).astype(np.uint64)
        vals = acc[ukey.astype(np.int64)]
    else:
        ukey, inv = np.unique(key, return_inverse=True)
        vals = np.bincount(inv, weights=c.real, minlength=ukey.size) + 1j * np.bincount(
            inv, weights=c.imag, minlength=ukey.size
        )
    keep = np.abs(vals) >= prune_tol if prune_tol > 0 else vals != 0
    ukey, vals = ukey[keep], vals[keep]
    mask = np.uint64((1 << n) - 1)
    return ukey >> np.uint64(n), ukey & mask, vals.astype(np.complex128)


def _product_arrays(x1, z1, c1, x2, z2, c2):
    """All pairwise products of two term lists, flattened."""
    X1, X2 = x1[:, None], x2[None, :]
    Z1, Z2 = z1[:, None], z2[None, :]
    x, z = X1 ^ X2, Z1 ^ Z2
    k = (
        np.bitwise_count(X1 & Z1).astype(np.int64)
        + np.bitwise_count(X2 & Z2)
        + 2 * np.bitwise_count(Z1 & X2).astype(np.int64)
        - np.bitwise_count(x & z)
    ) % 4
    c = (c1[:, None] * c2[None, :]) * _IPOW[k]
    return x.ravel(), z.ravel(), c.ravel()


def sum_mul(lhs: PauliSum, rhs: PauliSum, prune_tol: float = DEFAULT_PRUNE_TOL) -> PauliSum:
    """Product ``lhs @ rhs`` with like terms merged and ``|coeff| < prune_tol`` dropped."""
    if lhs.n_qubits != rhs.n_qubits:
        raise ValueError(f"register mismatch: {lhs.n_qubits} vs {rhs.n_qubits}")
    if prune_tol < 0:
        raise ValueError("prune_tol must be nonnegative")
    n = lhs.n_qubits
    if len(lhs) == 0 or len(rhs) == 0:
        return PauliSum(n)
    rows = max(1, _CHUNK // len(rhs))
    parts = []
    for start in range(0, len(lhs), rows):
        sl = slice(start, start + rows)
        x, z, c = _product_arrays(lhs._x[sl], lhs._z[sl], lhs._c[sl], rhs._x, rhs._z, rhs._c)
        # merge each chunk right away to bound memory; prune only at the end
        parts.append(_combine(n, x, z, c, 0.0))
    if len(parts) == 1:
        x, z, c = parts[0]
        return PauliSum._from_arrays(n, x, z, c, prune_tol, combined=True)
    x = np.concatenate([p[0] for p in parts])
    z = np.concatenate([p[1] for p in parts])
    c = np.concatenate([p[2] for p in parts])
    return PauliSum._from_arrays(n, x, z, c, prune_tol)


def linear_combination(n_qubits: int, items: Iterable[tuple[complex, PauliSum]], prune_tol=DEFAULT_PRUNE_TOL) -> PauliSum:
    """``sum_k a_k * S_k`` merged in a single pass."""
    xs, zs, cs = [], [], []
    for a, s in items:
        if s.n_qubits != n_qubits:
            raise ValueError("register mismatch")
        if a == 0 or len(s) == 0:
            continue
        xs.append(s.x_masks)
        zs.append(s.z_masks)
        cs.append(s.coeffs * a)
    if not cs:
        return PauliSum(n_qubits)
    return PauliSum._from_arrays(
        n_qubits, np.concatenate(xs), np.concatenate(zs), np.concatenate(cs), prune_tol
    )
