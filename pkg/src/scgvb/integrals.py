"""Contracted s-Gaussian integrals for hydrogen clusters, plus integral file I/O.

Two-electron integrals are stored in chemist's notation ``(pq|rs)``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np

# Bohr radius in Angstrom (CODATA 2010).
BOHR_ANGSTROM = 0.52917721092

SYMMETRY_TOL = 1e-8


class IntegralError(ValueError):
    pass


# ---------------------------------------------------------------- Boys function
def boys_f0(t: float) -> float:
    """``F0(t) = int_0^1 exp(-t x^2) dx``."""
    t = float(t)
    if not math.isfinite(t) or t < 0:
        raise ValueError(f"boys_f0 needs a finite nonnegative argument, got {t}")
    if t < 1e-6:
        return 1.0 - t / 3.0 + t * t / 10.0 - t**3 / 42.0
    r = math.sqrt(t)
    return 0.5 * math.sqrt(math.pi) / r * math.erf(r)


# ---------------------------------------------------------------- geometry
@dataclass(frozen=True)
class Geometry:
    atoms: tuple[tuple[str, tuple[float, float, float]], ...]
    charge: int = 0
    units: str = "angstrom"

    def __post_init__(self) -> None:
        if not self.atoms:
            raise IntegralError("geometry needs at least one atom")
        if self.units not in ("angstrom", "bohr"):
            raise IntegralError(f"unknown units {self.units!r}")
        atoms = tuple((str(sym).capitalize(), tuple(float(v) for v in pos)) for sym, pos in self.atoms)
        for sym, pos in atoms:
            if len(pos) != 3 or not all(math.isfinite(v) for v in pos):
                raise IntegralError(f"bad position for {sym}: {pos}")
        object.__setattr__(self, "atoms", atoms)

    @property
    def symbols(self) -> list[str]:
        return [a[0] for a in self.atoms]

    def coords_bohr(self) -> np.ndarray:
        xyz = np.array([a[1] for a in self.atoms], dtype=float)
        return xyz / BOHR_ANGSTROM if self.units == "angstrom" else xyz

    def translated(self, shift) -> Geometry:
        atoms = tuple((s, tuple(np.add(p, shift))) for s, p in self.atoms)
        return Geometry(atoms, self.charge, self.units)

    @classmethod
    def from_xyz(cls, text: str, units: str = "angstrom", charge: int = 0) -> Geometry:
        """Parse ``"H x y z"`` lines; a leading atom count and comment line are skipped."""
        lines = [ln.split() for ln in text.strip().splitlines() if ln.strip()]
        if lines and len(lines[0]) == 1 and lines[0][0].isdigit():
            lines = lines[2:] if len(lines) > 1 and len(lines[1]) != 4 else lines[1:]
        atoms = []
        for parts in lines:
            if len(parts) != 4:
                raise IntegralError(f"cannot parse geometry line {' '.join(parts)!r}")
            atoms.append((parts[0], tuple(float(v) for v in parts[1:])))
        return cls(tuple(atoms), charge, units)

    def to_xyz(self) -> str:
        return "\n".join(f"{s} {x:.10f} {y:.10f} {z:.10f}" for s, (x, y, z) in self.atoms)


def h4_rectangle(side_12: float, side_23: float = 0.7414) -> Geometry:
    """Planar H4 rectangle with atoms ordered around the perimeter (Angstrom).

    Atoms 1-2 and 3-4 are ``side_12`` apart, atoms 2-3 and 4-1 ``side_23``.
    """
    a, b = float(side_12), float(side_23)
    return Geometry(
        (("H", (0.0, 0.0, 0.0)), ("H", (a, 0.0, 0.0)), ("H", (a, b, 0.0)), ("H", (0.0, b, 0.0)))
    )


# ---------------------------------------------------------------- basis sets
@dataclass(frozen=True)
class Shell:
    exponents: tuple[float, ...]
    coefficients: tuple[float, ...]


def parse_nwchem_basis(text: str) -> dict[str, list[Shell]]:
    """Minimal NWChem-format reader for s shells."""
    out: dict[str, list[Shell]] = {}
    cur_el, exps, coefs = None, [], []

    def flush():
        if cur_el is not None and exps:
            out.setdefault(cur_el, []).append(Shell(tuple(exps), tuple(coefs)))

    for raw in text.splitlines():
        line = raw.split("#")[0].strip()
        if not line or line.upper().startswith("BASIS"):
            continue
        if line.upper() == "END":
            flush()
            cur_el, exps, coefs = None, [], []
            continue
        parts = line.split()
        if parts[0][0].isalpha():
            flush()
            if parts[1].upper() != "S":
                raise IntegralError(f"only s shells are supported, got {parts[1]!r}")
            cur_el, exps, coefs = parts[0].capitalize(), [], []
        else:
            exps.append(float(parts[0]))
            coefs.append(float(parts[1]))
    flush()
    return out


@lru_cache(maxsize=None)
def load_basis(name: str) -> dict[str, list[Shell]]:
    fname = {"sto-3g": "sto-3g.nw"}.get(name.lower())
    if fname is None:
        raise IntegralError(f"unsupported basis {name!r}")
    text = resources.files("scgvb").joinpath(f"data/{fname}").read_text()
    return parse_nwchem_basis(text)


@dataclass(frozen=True)
class _AO:
    center: np.ndarray
    alpha: np.ndarray
    coef: np.ndarray  # includes primitive normalization and contraction renorm


def _build_aos(geometry: Geometry, basis_name: str) -> list[_AO]:
    basis = load_basis(basis_name)
    coords = geometry.coords_bohr()
    aos = []
    for (sym, _), xyz in zip(geometry.atoms, coords):
        if sym != "H":
            raise IntegralError(f"unsupported element {sym!r}; only H is available")
        for shell in basis[sym]:
            a = np.array(shell.exponents)
            d = np.array(shell.coefficients) * (2 * a / np.pi) ** 0.75
            # renormalize the contraction so that <chi|chi> = 1
            p = a[:, None] + a[None, :]
            norm = float(d @ ((np.pi / p) ** 1.5) @ d)
            aos.append(_AO(xyz, a, d / math.sqrt(norm)))
    return aos


def _pair(a: _AO, b: _AO):
    p = a.alpha[:, None] + b.alpha[None, :]
    mu = a.alpha[:, None] * b.alpha[None, :] / p
    r2 = float(np.sum((a.center - b.center) ** 2))
    K = np.exp(-mu * r2)
    P = (a.alpha[:, None, None] * a.center + b.alpha[None, :, None] * b.center) / p[..., None]
    dd = a.coef[:, None] * b.coef[None, :]
    return p, mu, r2, K, P, dd


_boys_vec = np.vectorize(boys_f0, otypes=[float])


def _overlap(a: _AO, b: _AO) -> float:
    p, _, _, K, _, dd = _pair(a, b)
    return float(np.sum(dd * (np.pi / p) ** 1.5 * K))


def _kinetic(a: _AO, b: _AO) -> float:
    p, mu, r2, K, _, dd = _pair(a, b)
    return float(np.sum(dd * mu * (3 - 2 * mu * r2) * (np.pi / p) ** 1.5 * K))


def _nuclear(a: _AO, b: _AO, coords: np.ndarray, charges: np.ndarray) -> float:
    p, _, _, K, P, dd = _pair(a, b)
    total = 0.0
    for C, Z in zip(coords, charges):
        t = p * np.sum((P - C) ** 2, axis=-1)
        total -= Z * float(np.sum(dd * 2 * np.pi / p * K * _boys_vec(t)))
    return total


def _eri(a: _AO, b: _AO, c: _AO, d: _AO) -> float:
    p, _, _, K1, P, d1 = _pair(a, b)
    q, _, _, K2, Q, d2 = _pair(c, d)
    p4 = p[:, :, None, None]
    q4 = q[None, None, :, :]
    pq = p4 + q4
    dPQ = np.sum((P[:, :, None, None, :] - Q[None, None, :, :, :]) ** 2, axis=-1)
    t = p4 * q4 / pq * dPQ
    pref = 2 * np.pi**2.5 / (p4 * q4 * np.sqrt(pq))
    w = d1[:, :, None, None] * d2[None, None, :, :] * K1[:, :, None, None] * K2[None, None, :, :]
    return float(np.sum(w * pref * _boys_vec(t)))


def ao_overlap(geometry: Geometry, basis_name: str = "sto-3g") -> np.ndarray:
    """AO overlap matrix alone; coincident centers are allowed here."""
    aos = _build_aos(geometry, basis_name)
    n = len(aos)
    S = np.empty((n, n))
    for i, j in itertools.combinations_with_replacement(range(n), 2):
        S[i, j] = S[j, i] = _overlap(aos[i], aos[j])
    return S


# ---------------------------------------------------------------- containers
@dataclass(frozen=True, eq=False)
class MolecularIntegrals:
    """AO-basis integrals: overlap ``S``, core ``h``, chemist-order ``g``, ``e_nuc``."""

    S: np.ndarray
    h: np.ndarray
    g: np.ndarray
    e_nuc: float = 0.0
    max_asymmetry: float = field(default=0.0, compare=False)

    def __post_init__(self) -> None:
        S = np.array(self.S, dtype=float)
        h = np.array(self.h, dtype=float)
        g = np.array(self.g, dtype=float)
        m = S.shape[0]
        if S.shape != (m, m) or h.shape != (m, m) or g.shape != (m,) * 4:
            raise IntegralError("inconsistent integral shapes")
        for arr in (S, h, g):
            arr.setflags(write=False)
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "e_nuc", float(self.e_nuc))

    @property
    def n_orb(self) -> int:
        return self.S.shape[0]

    def validate(self, tol: float = SYMMETRY_TOL) -> float:
        """Check symmetries and positive definiteness; return max asymmetry."""
        asym = max(_g_asymmetry(self.g), float(np.max(np.abs(self.S - self.S.T))),
                   float(np.max(np.abs(self.h - self.h.T))))
        if asym > tol:
            raise IntegralError(f"integrals not symmetric (max asymmetry {asym:.3e})")
        if np.min(np.linalg.eigvalsh(self.S)) <= 0:
            raise IntegralError("overlap not positive definite")
        return asym


def _g_asymmetry(g: np.ndarray) -> float:
    return max(
        float(np.max(np.abs(g - g.transpose(1, 0, 2, 3)))),
        float(np.max(np.abs(g - g.transpose(0, 1, 3, 2)))),
        float(np.max(np.abs(g - g.transpose(2, 3, 0, 1)))),
    )


def nuclear_repulsion(geometry: Geometry) -> float:
    coords = geometry.coords_bohr()
    e = 0.0
    for i, j in itertools.combinations(range(len(coords)), 2):
        r = float(np.linalg.norm(coords[i] - coords[j]))
        if r < 1e-10:
            raise IntegralError(f"coincident nuclei {i + 1} and {j + 1}")
        e += 1.0 / r  # hydrogen only: Z = 1
    return e


def build_integrals(geometry: Geometry, basis_name: str = "sto-3g") -> MolecularIntegrals:
    e_nuc = nuclear_repulsion(geometry)
    aos = _build_aos(geometry, basis_name)
    coords = geometry.coords_bohr()
    charges = np.ones(len(coords))
    n = len(aos)
    S = np.empty((n, n))
    h = np.empty((n, n))
    for i, j in itertools.combinations_with_replacement(range(n), 2):
        S[i, j] = S[j, i] = _overlap(aos[i], aos[j])
        h[i, j] = h[j, i] = _kinetic(aos[i], aos[j]) + _nuclear(aos[i], aos[j], coords, charges)
    g = np.empty((n,) * 4)
    for (i, j, k, l), v in _unique_eri(aos):
        for idx in _g_images(i, j, k, l):
            g[idx] = v
    mi = MolecularIntegrals(S, h, g, e_nuc)
    mi.validate()
    return mi


def _unique_eri(aos):
    n = len(aos)
    for i in range(n):
        for j in range(i + 1):
            for k in range(n):
                for l in range(k + 1):
                    if i * (i + 1) // 2 + j >= k * (k + 1) // 2 + l:
                        yield (i, j, k, l), _eri(aos[i], aos[j], aos[k], aos[l])


def _g_images(p, q, r, s):
    return {
        (p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r),
        (r, s, p, q), (s, r, p, q), (r, s, q, p), (s, r, q, p),
    }


# ---------------------------------------------------------------- spin orbitals
@dataclass(frozen=True, eq=False)
class SpinOrbitalIntegrals:
    """Spin-orbital blocks: alpha orbitals occupy indices 0..M-1, beta M..2M-1.

    ``g_so`` is in chemist's order and already multiplied by ``two_body_scale``.
    """

    S_so: np.ndarray
    h_so: np.ndarray
    g_so: np.ndarray
    e_nuc: float = 0.0
    two_body_scale: float = 1.0

    @property
    def n_so(self) -> int:
        return self.S_so.shape[0]


def to_spin_orbitals(mi: MolecularIntegrals, two_body_scale: float = 1.0) -> SpinOrbitalIntegrals:
    """Expand to spin orbitals.

    ``two_body_scale`` multiplies every two-electron integral.  The default 1
    gives the usual ``1/2 sum g a+ a+ a a`` Hamiltonian; 2 reproduces the
    H4 reference tables (see README).
    """
    m = mi.n_orb
    S = np.kron(np.eye(2), mi.S)
    h = np.kron(np.eye(2), mi.h)
    g = np.zeros((2 * m,) * 4)
    for s1 in (0, 1):
        for s2 in (0, 1):
            a, b = slice(s1 * m, (s1 + 1) * m), slice(s2 * m, (s2 + 1) * m)
            g[a, a, b, b] = mi.g
    g *= two_body_scale
    return SpinOrbitalIntegrals(S, h, g, mi.e_nuc, float(two_body_scale))


# ---------------------------------------------------------------- file I/O
def write_integrals(mi: MolecularIntegrals, path: str | Path) -> None:
    path = Path(path)
    if path.suffix.lower() == ".json":
        path.write_text(json.dumps(integrals_to_json(mi), indent=1))
        return
    m = mi.n_orb
    lines = [f"NORB {m} ENUC {mi.e_nuc:.17g}", "==S=="]
    for p, q in itertools.combinations_with_replacement(range(m), 2):
        lines.append(f"{mi.S[q, p]:.17g} {q + 1} {p + 1}")
    lines.append("==H==")
    for p, q in itertools.combinations_with_replacement(range(m), 2):
        lines.append(f"{mi.h[q, p]:.17g} {q + 1} {p + 1}")
    lines.append("==G==")
    for (p, q, r, s) in _unique_indices(m):
        lines.append(f"{mi.g[p, q, r, s]:.17g} {p + 1} {q + 1} {r + 1} {s + 1}")
    path.write_text("\n".join(lines) + "\n")


def _unique_indices(m):
    for p in range(m):
        for q in range(p + 1):
            for r in range(m):
                for s in range(r + 1):
                    if p * (p + 1) // 2 + q >= r * (r + 1) // 2 + s:
                        yield p, q, r, s


def integrals_to_json(mi: MolecularIntegrals) -> dict:
    return {
        "n_orb": mi.n_orb,
        "e_nuc": mi.e_nuc,
        "S": mi.S.tolist(),
        "h": mi.h.tolist(),
        "g_sparse": [
            [p + 1, q + 1, r + 1, s + 1, float(mi.g[p, q, r, s])]
            for p, q, r, s in _unique_indices(mi.n_orb)
            if mi.g[p, q, r, s] != 0.0
        ],
    }


def _fill(shape, entries, images) -> tuple[np.ndarray, float]:
    """Place explicit entries, fill symmetric images, report max conflict."""
    arr = np.full(shape, np.nan)
    for idx, v in entries:
        arr[idx] = v
    asym = 0.0
    for idx, v in entries:
        for img in images(*idx):
            if np.isnan(arr[img]):
                arr[img] = v
            else:
                asym = max(asym, abs(arr[img] - v))
    arr[np.isnan(arr)] = 0.0
    return arr, asym


def _sym2(p, q):
    return {(q, p)}


def load_integrals(path: str | Path) -> MolecularIntegrals:
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json":
        return integrals_from_json(json.loads(text))
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    try:
        head = lines[0].split()
        if head[0].upper() != "NORB" or head[2].upper() != "ENUC":
            raise ValueError
        m, e_nuc = int(head[1]), float(head[3])
    except (IndexError, ValueError):
        raise IntegralError(f"{path}: bad header line") from None
    sections: dict[str, list] = {"S": [], "H": [], "G": []}
    cur = None
    for ln in lines[1:]:
        if ln.startswith("==") and ln.endswith("=="):
            cur = ln.strip("=").upper()
            if cur not in sections:
                raise IntegralError(f"{path}: unknown section {ln!r}")
            continue
        if cur is None:
            raise IntegralError(f"{path}: data before first section")
        parts = ln.split()
        try:
            v = float(parts[0])
            idx = tuple(int(t) - 1 for t in parts[1:])
        except (ValueError, IndexError):
            raise IntegralError(f"{path}: cannot parse line {ln!r}") from None
        if cur in ("S", "H"):
            if len(idx) == 4 and idx[2:] == (-1, -1):
                idx = idx[:2]
            if len(idx) != 2:
                raise IntegralError(f"{path}: expected 2 indices in {ln!r}")
        elif len(idx) != 4:
            raise IntegralError(f"{path}: expected 4 indices in {ln!r}")
        if any(i < 0 or i >= m for i in idx):
            raise IntegralError(f"{path}: index out of range in {ln!r}")
        sections[cur].append((idx, v))
    S, a1 = _fill((m, m), sections["S"], _sym2)
    h, a2 = _fill((m, m), sections["H"], _sym2)
    g, a3 = _fill((m,) * 4, sections["G"], _g_images)
    return _checked(S, h, g, e_nuc, max(a1, a2, a3))


def integrals_from_json(data: dict) -> MolecularIntegrals:
    m = int(data["n_orb"])
    S = np.array(data["S"], dtype=float)
    h = np.array(data["h"], dtype=float)
    entries = [(tuple(int(i) - 1 for i in row[:4]), float(row[4])) for row in data["g_sparse"]]
    g, a3 = _fill((m,) * 4, entries, _g_images)
    asym = max(a3, float(np.max(np.abs(S - S.T))), float(np.max(np.abs(h - h.T))))
    return _checked(S, h, g, float(data["e_nuc"]), asym)


def _checked(S, h, g, e_nuc, asym) -> MolecularIntegrals:
    if asym > SYMMETRY_TOL:
        raise IntegralError(f"integrals not symmetric (max asymmetry {asym:.3e})")
    S = 0.5 * (S + S.T)
    h = 0.5 * (h + h.T)
    g = (g + g.transpose(1, 0, 2, 3) + g.transpose(0, 1, 3, 2) + g.transpose(1, 0, 3, 2)) / 4
    g = 0.5 * (g + g.transpose(2, 3, 0, 1))
    mi = MolecularIntegrals(S, h, g, e_nuc, max_asymmetry=asym)
    mi.validate()
    return mi
