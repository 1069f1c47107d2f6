"""Command-line driver: ``scgvb run|tables|compare|integrals|resources``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from .estimators import EstimatorConfig, Mode, resource_report
from .integrals import Geometry, IntegralError, load_integrals, write_integrals
from .nojw import DEFAULT_SCHEME, Scheme
from .workflow import (
    CONVENTIONS,
    H4_SCAN,
    DeterminantProblem,
    compare_tables,
    thread_count,
)

CSV_COLUMNS = ("i", "j", "quantum", "reference", "abs_dev")
EXACT_TOL = 1e-8

# Reference circuit counts for square H4, used for an order-of-magnitude report.
REFERENCE_CIRCUITS = {"one_body": 42102, "two_body": 44804}


class InvariantViolation(RuntimeError):
    pass


def _fmt(v: float) -> str:
    return f"{v:.12f}"


# ---------------------------------------------------------------- parsing helpers
def parse_geometry_spec(spec: str) -> tuple[float, float]:
    """``"0.88x0.7414"`` -> (0.88, 0.7414); a single number means a square."""
    parts = spec.lower().split("x")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad geometry {spec!r}; expected AxB") from None
    if len(vals) == 1:
        vals *= 2
    if len(vals) != 2:
        raise argparse.ArgumentTypeError(f"bad geometry {spec!r}; expected AxB")
    return vals[0], vals[1]


def _problems(args) -> list[DeterminantProblem]:
    scale = CONVENTIONS[args.convention]
    common = dict(two_body_scale=scale, scheme=Scheme(args.scheme))
    if getattr(args, "xyz", None):
        geom = Geometry.from_xyz(Path(args.xyz).read_text(), units=args.units)
        return [DeterminantProblem.from_geometry(geom, args.basis, label=Path(args.xyz).stem, **common)]
    if getattr(args, "integrals", None):
        mi = load_integrals(args.integrals)
        return [DeterminantProblem(mi, label=Path(args.integrals).stem, **common)]
    specs = args.geometry or [f"{a}x{b}" for a, b in H4_SCAN]
    out = []
    for spec in specs:
        a, b = parse_geometry_spec(spec) if isinstance(spec, str) else spec
        out.append(DeterminantProblem.h4(a, b, **common))
    return out


def _config(args) -> EstimatorConfig:
    return EstimatorConfig(mode=Mode(args.mode), shots=args.shots, seed=args.seed)


def _reference(args, prob: DeterminantProblem):
    if args.reference in ("lowdin", "fock"):
        return prob.reference(args.reference)
    S = read_table(Path(args.reference_file_s)) if args.reference_file_s else prob.lowdin[0]
    H = read_table(Path(args.reference_file_h)) if args.reference_file_h else prob.lowdin[1]
    return S, H


# ---------------------------------------------------------------- table I/O
def table_rows(quantum: np.ndarray, reference: np.ndarray) -> list[tuple]:
    n = quantum.shape[0]
    return [
        (i + 1, j + 1, quantum[i, j], reference[i, j], abs(quantum[i, j] - reference[i, j]))
        for i in range(n)
        for j in range(i, n)
    ]


def render_table(quantum, reference, fmt: str = "csv") -> str:
    rows = table_rows(quantum, reference)
    if fmt == "json":
        return json.dumps(
            [dict(zip(CSV_COLUMNS, (i, j, q, r, d))) for i, j, q, r, d in rows], indent=1
        ) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for i, j, q, r, d in rows:
        w.writerow((i, j, _fmt(q), _fmt(r), _fmt(d)))
    return buf.getvalue()


def read_table(path: Path, column: str = "quantum") -> np.ndarray:
    """Read a table written by ``render_table`` (or any i,j,value CSV) into a symmetric matrix."""
    text = path.read_text()
    if path.suffix.lower() == ".json":
        rows = json.loads(text)
    else:
        rows = list(csv.DictReader(io.StringIO(text)))
    if not rows:
        raise ValueError(f"{path}: empty table")
    key = column if column in rows[0] else [k for k in rows[0] if k not in ("i", "j")][0]
    n = max(max(int(r["i"]), int(r["j"])) for r in rows)
    M = np.zeros((n, n))
    for r in rows:
        i, j = int(r["i"]) - 1, int(r["j"]) - 1
        M[i, j] = M[j, i] = float(r[key])
    return M


# ---------------------------------------------------------------- commands
def _evaluate(prob: DeterminantProblem, args, threads: int) -> dict:
    config = _config(args)
    S, s_res = prob.overlap_matrix(config, threads)
    H, h_res = prob.hamiltonian_matrix(config, threads)
    S_ref, H_ref = _reference(args, prob)
    s_dev, h_dev = compare_tables(S, S_ref), compare_tables(H, H_ref)
    res = resource_report(h_res)
    if res["max_depth"] > 2 or res["n_multi_qubit_gates"]:
        raise InvariantViolation(f"{prob.label}: circuit structure violated ({res})")
    if config.mode is Mode.EXACT and max(s_dev.max, h_dev.max) > EXACT_TOL:
        raise InvariantViolation(
            f"{prob.label}: exact-mode deviation {max(s_dev.max, h_dev.max):.3e} exceeds {EXACT_TOL}"
        )
    analysis = prob.structure_analysis(S, H)
    ref_analysis = prob.structure_analysis(S_ref, H_ref)
    return dict(S=S, H=H, S_ref=S_ref, H_ref=H_ref, s_dev=s_dev, h_dev=h_dev,
                resources=res, analysis=analysis, ref_analysis=ref_analysis)


def _summary_json(prob, args, out) -> dict:
    res = dict(out["resources"])
    res.pop("wall_time", None)  # keep output files reproducible
    a, r = out["analysis"], out["ref_analysis"]
    return {
        "geometry": prob.label,
        "config": {
            "mode": args.mode, "shots": args.shots, "seed": args.seed, "scheme": args.scheme,
            "convention": args.convention, "reference": args.reference, "basis": args.basis,
        },
        "e_nuc": prob.integrals.e_nuc,
        "overlap_deviation": out["s_dev"].to_dict(),
        "hamiltonian_deviation": out["h_dev"].to_dict(),
        "structures": {
            "c": a.solution.ground.tolist(),
            "energy_electronic": float(a.solution.energies[0]),
            "energy_total": a.ground_energy,
            "weights": {"cc": list(a.weights.cc), "lowdin": list(a.weights.lowdin),
                        "inverse": list(a.weights.inverse)},
            "reference_c": r.solution.ground.tolist(),
            "reference_weights_cc": list(r.weights.cc),
        },
        "resources": res,
    }


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def cmd_run(args) -> int:
    threads = thread_count()
    out_dir = Path(args.out)
    ext = args.format
    weight_rows = []
    for prob in _problems(args):
        try:
            out = _evaluate(prob, args, threads)
        except InvariantViolation:
            raise
        except Exception as exc:  # surface the geometry with the error
            raise RuntimeError(f"geometry {prob.label}: {exc}") from exc
        _write(out_dir / f"{prob.label}_overlap.{ext}", render_table(out["S"], out["S_ref"], ext))
        _write(out_dir / f"{prob.label}_hamiltonian.{ext}", render_table(out["H"], out["H_ref"], ext))
        summary = _summary_json(prob, args, out)
        _write(out_dir / f"{prob.label}_summary.json", json.dumps(summary, indent=1) + "\n")
        a = out["analysis"]
        weight_rows.append((prob.label, *a.solution.ground, *a.weights.cc))
        hd = out["h_dev"]
        print(f"{prob.label}: mean|dH| {hd.mean_full:.4f} max {hd.max:.5f} at {hd.argmax}; "
              f"CC weights {a.weights.cc[0]:.4f} {a.weights.cc[1]:.4f}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("geometry", "c1", "c2", "w1", "w2"))
    for row in weight_rows:
        w.writerow((row[0], *(f"{v:.6f}" for v in row[1:])))
    _write(out_dir / "weights.csv", buf.getvalue())
    return 0


def cmd_tables(args) -> int:
    threads = thread_count()
    prob = _problems(args)[0]
    out = _evaluate(prob, args, threads)
    text = (
        "# overlap\n" + render_table(out["S"], out["S_ref"], args.format)
        + "# hamiltonian\n" + render_table(out["H"], out["H_ref"], args.format)
    )
    if args.out:
        _write(Path(args.out) / f"{prob.label}_overlap.{args.format}", render_table(out["S"], out["S_ref"], args.format))
        _write(Path(args.out) / f"{prob.label}_hamiltonian.{args.format}", render_table(out["H"], out["H_ref"], args.format))
    else:
        sys.stdout.write(text)
    return 0


def cmd_compare(args) -> int:
    A = read_table(Path(args.computed), args.column)
    B = read_table(Path(args.reference_table), args.reference_column)
    print(json.dumps(compare_tables(A, B).to_dict(), indent=1))
    return 0


def cmd_integrals(args) -> int:
    if args.action == "dump":
        prob = _problems(args)[0]
        write_integrals(prob.integrals, args.path)
        print(f"wrote {args.path}")
    else:
        mi = load_integrals(args.path)
        print(json.dumps({"n_orb": mi.n_orb, "e_nuc": mi.e_nuc, "max_asymmetry": mi.max_asymmetry,
                          "S": np.round(mi.S, 10).tolist()}, indent=1))
    return 0


def cmd_resources(args) -> int:
    prob = _problems(args)[0]
    config = EstimatorConfig(mode=Mode.EXACT, shots=args.shots)
    _, results = prob.hamiltonian_matrix(config, thread_count())
    # the reference counts cover all 36 ordered pairs; mirror the off-diagonal ones
    weight = [1 if i == j else 2 for i in range(len(prob.dets)) for j in range(i, len(prob.dets))]
    per_part = {"one_body": 0, "two_body": 0}
    for r, wgt in zip(results, weight):
        for k, v in r.diagnostics["circuits_per_part"].items():
            per_part[k] += wgt * v
    rep = resource_report(results)
    rep.pop("wall_time", None)
    n_q = prob.spin_integrals.n_so
    report = {
        "geometry": prob.label,
        "n_orbitals": prob.integrals.n_orb,
        "n_qubits": n_q,
        "circuits_unique_pairs": rep["n_circuits"],
        "circuits_all_pairs": per_part,
        "circuits_all_pairs_total": sum(per_part.values()),
        "measured_qubits_all_pairs": {k: v * n_q for k, v in per_part.items()},
        "shots_per_circuit": args.shots,
        "reference_circuits": REFERENCE_CIRCUITS,
        "ratio_to_reference": {k: per_part[k] / REFERENCE_CIRCUITS[k] for k in per_part},
        **{k: v for k, v in rep.items() if k != "n_circuits"},
    }
    print(json.dumps(report, indent=1))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="scgvb", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, estimator=True):
        g = sp.add_argument_group("system")
        g.add_argument("--geometry", action="append", type=parse_geometry_spec, metavar="AxB",
                       help="H4 rectangle sides in Angstrom (repeatable); default: the 5-point scan")
        g.add_argument("--xyz", help="XYZ-style geometry file instead of --geometry")
        g.add_argument("--integrals", help="integral file (text or .json) instead of a geometry")
        g.add_argument("--units", choices=("angstrom", "bohr"), default="angstrom")
        g.add_argument("--basis", default="sto-3g")
        g.add_argument("--scheme", choices=[s.value for s in Scheme], default=DEFAULT_SCHEME.value)
        g.add_argument("--convention", choices=sorted(CONVENTIONS), default="tables",
                       help="two-electron scale: 'tables' drops the 1/2 to match the reference tables")
        if estimator:
            e = sp.add_argument_group("estimator")
            e.add_argument("--mode", choices=[m.value for m in Mode], default="sampled")
            e.add_argument("--shots", type=int, default=524288)
            e.add_argument("--seed", type=int, default=0)
            e.add_argument("--reference", choices=("lowdin", "fock", "file"), default="lowdin")
            e.add_argument("--reference-file-s", help="overlap reference table for --reference file")
            e.add_argument("--reference-file-h", help="Hamiltonian reference table for --reference file")
            e.add_argument("--format", choices=("csv", "json"), default="csv")

    sp = sub.add_parser("run", help="scan geometries and write per-geometry tables")
    common(sp)
    sp.add_argument("--out", default="results")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("tables", help="overlap and Hamiltonian tables for one geometry")
    common(sp)
    sp.add_argument("--out", help="directory for table files (default: stdout)")
    sp.set_defaults(func=cmd_tables)

    sp = sub.add_parser("compare", help="deviation summary between two table files")
    sp.add_argument("computed")
    sp.add_argument("reference_table")
    sp.add_argument("--column", default="quantum")
    sp.add_argument("--reference-column", default="quantum")
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("integrals", help="dump or inspect integral files")
    sp.add_argument("action", choices=("dump", "load"))
    sp.add_argument("path")
    common(sp, estimator=False)
    sp.set_defaults(func=cmd_integrals)

    sp = sub.add_parser("resources", help="circuit and gate counts for one geometry")
    common(sp, estimator=False)
    sp.add_argument("--shots", type=int, default=524288)
    sp.set_defaults(func=cmd_resources)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "geometry", None) and args.command in ("tables", "integrals", "resources"):
        args.geometry = args.geometry[:1]
    if args.command in ("tables", "integrals", "resources") and not (
        args.geometry or args.xyz or args.integrals
    ):
        args.geometry = [(0.7414, 0.7414)]
    try:
        return args.func(args)
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 2
    except (IntegralError, ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
