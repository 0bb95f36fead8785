"""Command-line entry point: ``atomlab {ci,blowup,atoms,sing,pairing}``.

Exit codes: 0 success, 1 domain error (AtomlabError), 2 parse or I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from . import atoms as at
from . import blowup as bl
from . import pairing as pr
from . import singular as sg
from .errors import AtomlabError
from .exactalg import DEFAULT_TOL, charpoly, rational_str, roots_clustered
from .fbundle import residual_kappa, spectral_split
from .qde import CompleteIntersection, matrix_rows_str, qde_str, small_connection


@dataclass
class Report:
    command: str
    inputs: dict
    artifacts: dict = field(default_factory=dict)
    provenance: list = field(default_factory=list)
    table: list = field(default_factory=list)  # rows for --csv
    lines: list = field(default_factory=list)  # human-readable text

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "inputs": self.inputs,
            "artifacts": self.artifacts,
            "provenance": self.provenance,
        }


def cx(z, exact=None) -> dict:
    out = {"re": float(z.real), "im": float(z.imag)}
    if exact is not None:
        out["exact"] = exact
    return out


def spectrum_dict(spec) -> list:
    return [
        {"value": cx(e.value, e.exact), "multiplicity": e.multiplicity} for e in spec.entries
    ]


def fmt_complex(z: complex) -> str:
    re = 0.0 if abs(z.real) < 1e-12 else z.real
    im = 0.0 if abs(z.imag) < 1e-12 else z.imag
    if im == 0:
        return f"{re:.10g}"
    if re == 0:
        return f"{im:.10g}i"
    return f"{re:.10g}{im:+.10g}i"


def resolve_tol(arg) -> float:
    if arg is not None:
        return float(arg)
    env = os.environ.get("ATOMLAB_TOL")
    return float(env) if env else DEFAULT_TOL


def _load_json(path: str):
    if path == "-":
        return json.load(sys.stdin)
    with open(path) as fh:
        return json.load(fh)


# --------------------------------------------------------------------------
# ci


def cmd_ci(args, tol: float) -> Report:
    ci = CompleteIntersection(args.N, tuple(args.deg))
    rep = Report("ci", {"N": ci.N, "degrees": list(ci.degrees), "q0": str(args.q0)})
    conn = small_connection(ci)
    q0 = Fraction(args.q0)
    K0 = residual_kappa(conn, q0)
    cp = charpoly(K0)
    spec = roots_clustered(cp, tol)
    a = rep.artifacts
    a["label"] = ci.label()
    a["dim"] = ci.dim
    a["index"] = ci.index
    a["qde"] = qde_str(ci)
    a["A"] = conn.A.to_strings()
    a["K"] = conn.K.to_strings()
    a["G"] = [rational_str(g) for g in conn.G]
    a["K_at_q0"] = matrix_rows_str(K0)
    a["charpoly"] = str(cp)
    a["spectrum"] = spectrum_dict(spec)
    rep.provenance += list(conn.checks)
    rep.lines += [
        f"{ci.label()}: dim {ci.dim}, index {ci.index}",
        f"QDE: {a['qde']}",
        "A =",
        *("  " + "  ".join(f"{x:>6}" for x in row) for row in a["A"]),
        f"K = {ci.index}*A, G = diag({', '.join(a['G'])})",
        f"charpoly(K|q={args.q0}) = {cp}",
        "spectrum: " + ", ".join(
            f"{e.exact or fmt_complex(e.value)} (x{e.multiplicity})" for e in spec.entries
        ),
    ]
    rep.table = [["eigenvalue", "re", "im", "multiplicity"]] + [
        [e.exact or fmt_complex(e.value), e.value.real, e.value.imag, e.multiplicity]
        for e in spec.entries
    ]
    if (ci.N, ci.degrees) in at.VALIDATED_HYPERSURFACES and q0 == 1:
        split = spectral_split(K0, tol)
        cf = at.hypersurface_atoms(ci, split)
        verdict = at.nonrationality_verdict(cf, ci.dim)
        a["atoms"] = cf.to_dict()
        a["verdict"] = verdict.to_dict()
        rep.provenance.append("hypersurface atoms on the validated list")
        rep.lines.append("atoms:")
        for atom, m in cf.items():
            rep.lines.append(f"  {atom.id}: P = {atom.hodge_poly}, rho = {atom.rho} (x{m})")
        rep.lines.append(f"verdict: {verdict.verdict}" + (f" (witness {verdict.witness})" if verdict.witness else ""))
    else:
        a["verdict"] = None
        rep.lines.append("atoms: not on the validated list; no verdict")
    return rep


# --------------------------------------------------------------------------
# blowup


def cmd_blowup(args, tol: float) -> Report:
    if args.preset:
        if args.preset not in bl.PRESETS:
            raise ValueError(f"unknown preset {args.preset!r}")
        kw = {}
        if args.Qhat is not None:
            kw["Qhat"] = Fraction(args.Qhat)
        if args.epsilon is not None:
            kw["epsilon"] = Fraction(args.epsilon)
        s = bl.PRESETS[args.preset](**kw)
    elif args.scenario:
        s = bl.BlowupScenario.from_dict(_load_json(args.scenario))
    else:
        raise ValueError("give a scenario file or --preset")
    M = bl.build_blowup_kappa(s)
    rep = Report("blowup", {"scenario": s.to_dict(), "radius": args.radius})
    report = bl.cluster_verify(M, s, args.radius)
    rep.artifacts["kappa"] = matrix_rows_str(M)
    rep.artifacts["gr_kappa"] = matrix_rows_str(bl.build_gr_kappa(s))
    rep.artifacts["clusters"] = report.to_dict()
    rep.provenance.append("eigenvalues from the exact characteristic polynomial")
    rep.lines.append(f"scenario {s.name}: rank {s.rank}, r = {s.r}, Qhat = {s.Qhat}, epsilon = {s.epsilon}")
    for c, n in zip(report.centers, report.sizes):
        rep.lines.append(f"  cluster at {fmt_complex(c)}: {n}")
    rep.lines.append(f"max distance to center {report.max_offset:.3e} (radius {report.radius})")
    rep.table = [["center_re", "center_im", "size", "expected"]] + [
        [c.real, c.imag, n, e] for c, n, e in zip(report.centers, report.sizes, report.expected)
    ]
    return rep


# --------------------------------------------------------------------------
# atoms

DIAMOND_PRESETS = {
    "cubic4": at.cubic_fourfold_diamond,
    "k3": at.k3_diamond,
    "abelian": at.abelian_surface_diamond,
    "quintic": at.quintic_threefold_diamond,
    "point": at.point_diamond,
}


def _diamond(src: str) -> at.HodgeDiamond:
    if src in DIAMOND_PRESETS:
        return DIAMOND_PRESETS[src]()
    return at.HodgeDiamond.from_dict(_load_json(src))


def _cubic4_cf() -> at.ChemicalFormula:
    ci = CompleteIntersection(6, (3,))
    return at.hypersurface_atoms(ci, spectral_split(residual_kappa(small_connection(ci), 1)))


def _formula(src: str) -> at.ChemicalFormula:
    if src == "cubic4":
        return _cubic4_cf()
    if src.startswith("pt:"):
        return at.points(int(src[3:]))
    return at.ChemicalFormula.from_dict(_load_json(src))


def cmd_atoms(args, tol: float) -> Report:
    sub = args.atoms_cmd
    if sub == "fold":
        dia = _diamond(args.diamond)
        P = at.fold(dia)
        rep = Report("atoms fold", {"diamond": dia.to_dict()})
        rep.artifacts["P"] = P.to_pairs()
        rep.artifacts["P_str"] = str(P)
        rep.artifacts["total"] = P.total
        rep.lines.append(f"P = {P}  (total {P.total})")
        rep.table = [["k", "c"]] + P.to_pairs()
        return rep
    if sub == "cf":
        cf = at.ChemicalFormula()
        for src in args.formulas:
            cf = cf + _formula(src)
        if args.blowup:
            cf = at.blowup_cf(cf, _formula(args.blowup), args.r)
        if args.proj:
            cf = at.proj_bundle_cf(cf, args.proj)
        if args.scale is not None:
            cf = at.cf_scale(cf, args.scale)
        rep = Report("atoms cf", {"formulas": args.formulas, "blowup": args.blowup, "r": args.r, "proj": args.proj, "scale": args.scale})
        rep.artifacts["formula"] = cf.to_dict()
        rep.lines += [f"{a.id}: P = {a.hodge_poly}, rho = {a.rho} (x{m})" for a, m in cf.items()]
        rep.table = [["id", "P", "rho", "dim_witness", "mult"]] + [
            [a.id, str(a.hodge_poly), a.rho, a.dim_witness, m] for a, m in cf.items()
        ]
        return rep
    if sub == "verdict":
        cf = _formula(args.formula)
        rules = at.load_rules(open(args.rules).read()) if args.rules else at.DEFAULT_RULES
        v = at.nonrationality_verdict(cf, args.d, rules)
        rep = Report("atoms verdict", {"formula": cf.to_dict(), "d": args.d, "rules": [r.to_dict() for r in rules]})
        rep.artifacts.update(v.to_dict())
        rep.lines.append(f"verdict: {v.verdict}" + (f" (witness {v.witness})" if v.witness else ""))
        for t in v.rule_trace:
            rep.lines.append(f"  {t['atom']}: P = {t['P']}, rho = {t['rho']}, admitted by {t['admitted_by'] or 'nothing'}")
        rep.table = [["atom", "P", "rho", "admitted_by"]] + [
            [t["atom"], t["P"], t["rho"], ";".join(t["admitted_by"])] for t in v.rule_trace
        ]
        return rep
    if sub == "cy":
        d1, d2 = _diamond(args.first), _diamond(args.second)
        res = at.cy_birational_check(d1, d2)
        rep = Report("atoms cy", {"first": d1.to_dict(), "second": d2.to_dict()})
        rep.artifacts.update(res.to_dict())
        if res.consistent:
            rep.lines.append("consistent: folded Hodge polynomials agree")
        else:
            rep.lines.append(f"inconsistent at k={res.k}: {res.lhs} vs {res.rhs}")
        rep.table = [["k", "first", "second"]] + [list(m) for m in res.mismatches]
        return rep
    raise ValueError(f"unknown atoms subcommand {sub!r}")


# --------------------------------------------------------------------------
# sing


def cmd_sing(args, tol: float) -> Report:
    r = sg.ts_unfolding_atoms(args.N, Fraction(args.z1), Fraction(args.z2), tol=tol)
    mu = sg.milnor_number(sg.PolyGerm({(args.N, 0): 1, (0, args.N): 1}))
    rep = Report("sing", {"N": args.N, "z1": args.z1, "z2": args.z2})
    rep.artifacts.update(r.to_dict())
    rep.artifacts["mu_central_fiber"] = mu.mu
    rep.provenance.append("closed-form points checked against the critical equations")
    rep.lines += [
        f"{len(r.points)} critical points (mu of x^N + y^N = {mu.mu}), {len(r.clusters)} critical values",
        *(f"  value {fmt_complex(v)}: {k} point(s)" for v, k in r.clusters),
        "orbits: " + ", ".join(f"size {len(o.points)} (stabilizer {o.stabilizer})" for o in r.orbits),
        "formula: " + ", ".join(f"{k} x{m}" for k, m in r.formula),
    ]
    if r.degenerate:
        rep.lines.append("warning: critical values collide at this tolerance")
    rep.table = [["value_re", "value_im", "points"]] + [[v.real, v.imag, k] for v, k in r.clusters]
    return rep


# --------------------------------------------------------------------------
# pairing


def cmd_pairing(args, tol: float) -> Report:
    if args.preset != "pn":
        raise ValueError(f"unknown preset {args.preset!r}")
    n = args.n
    ring, c1, td = pr.projective_space(n)
    ms = list(range(args.m_max + 1))
    chis = pr.chi_table(n, ms)
    serre = pr.serre_relation_check(ring, c1, td, samples=args.samples, seed=args.seed)
    gram = pr.gram_matrix(ring, td)
    mon = pr.monodromy_data(gram)
    rep = Report("pairing", {"preset": "pn", "n": n, "m_max": args.m_max, "samples": args.samples, "seed": args.seed})
    s = lambda x: repr(x)
    rep.artifacts["chi_O_Om"] = [{"m": m, "chi": s(c)} for m, c in zip(ms, chis)]
    rep.artifacts["todd"] = [s(x) for x in td.c]
    rep.artifacts["serre_operator"] = [[s(x) for x in row] for row in pr.serre_operator(ring, c1)]
    rep.artifacts["serre_relation"] = {"pairs": serre.samples, "passed": serre.passed}
    rep.artifacts["gram"] = [[s(x) for x in row] for row in gram]
    rep.artifacts["monodromy"] = [[s(x) for x in row] for row in mon.matrix]
    rep.artifacts["monodromy_eigenvalues"] = [cx(z) for z in mon.eigenvalues]
    rep.artifacts["monodromy_unipotent_sign"] = mon.unipotent_sign
    rep.provenance.append("Serre relation checked exactly over Gaussian rationals")
    rep.lines += [
        f"P^{n}: chi(O, O(m)) for m = 0..{args.m_max}: " + ", ".join(map(s, chis)),
        f"Serre relation chi(a,b) = chi(b,Sa): {'pass' if serre.passed else 'FAIL'} on {serre.samples} pairs",
        "Gram matrix: " + str([[s(x) for x in row] for row in gram]),
        f"monodromy is {'+' if mon.unipotent_sign == 1 else '-' if mon.unipotent_sign == -1 else 'not '}unipotent",
    ]
    rep.table = [["m", "chi"]] + [[m, s(c)] for m, c in zip(ms, chis)]
    return rep


# --------------------------------------------------------------------------
# wiring


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--json", action="store_true", help="emit the report as JSON")
    common.add_argument("--csv", action="store_true", help="emit the main table as CSV")
    common.add_argument("--tol", type=float, help="clustering tolerance (default 1e-9 or $ATOMLAB_TOL)")
    common.add_argument("--out", metavar="FILE", help="write output to FILE")

    p = argparse.ArgumentParser(prog="atomlab", description=__doc__.splitlines()[0], parents=[common])
    sub = p.add_subparsers(dest="cmd", required=True)

    c = sub.add_parser("ci", parents=[common], help="Fano complete intersection pipeline")
    c.add_argument("--N", type=int, required=True, help="ambient P^(N-1)")
    c.add_argument("--deg", type=int, action="append", required=True, help="degree (repeat for each equation)")
    c.add_argument("--q0", default="1", help="evaluate K at q = q0 (default 1)")

    b = sub.add_parser("blowup", parents=[common], help="blowup eigenvalue clusters")
    b.add_argument("scenario", nargs="?", help="scenario JSON file")
    b.add_argument("--preset", help="built-in scenario (blp3pt)")
    b.add_argument("--Qhat", help="override Qhat for a preset")
    b.add_argument("--epsilon", help="override epsilon for a preset")
    b.add_argument("--radius", type=float, help="cluster radius")

    a = sub.add_parser("atoms", parents=[common], help="diamonds, chemical formulas, verdicts")
    asub = a.add_subparsers(dest="atoms_cmd", required=True)
    f = asub.add_parser("fold", parents=[common], help="fold a Hodge diamond")
    f.add_argument("diamond", help="diamond JSON or preset: " + ", ".join(DIAMOND_PRESETS))
    cfp = asub.add_parser("cf", parents=[common], help="combine chemical formulas")
    cfp.add_argument("formulas", nargs="*", help="formula JSON files, 'cubic4' or 'pt:n'")
    cfp.add_argument("--blowup", help="blow up along a center with this formula")
    cfp.add_argument("--r", type=int, default=2, help="codimension for --blowup")
    cfp.add_argument("--proj", type=int, help="projective bundle of rank r")
    cfp.add_argument("--scale", type=int, help="multiply by a nonnegative integer")
    v = asub.add_parser("verdict", parents=[common], help="non-rationality verdict")
    v.add_argument("formula", help="formula JSON, 'cubic4' or 'pt:n'")
    v.add_argument("--d", type=int, required=True, help="dimension of the variety")
    v.add_argument("--rules", help="catalog rules JSON (default: dim <= 2 catalog)")
    y = asub.add_parser("cy", parents=[common], help="compare Calabi-Yau diamonds")
    y.add_argument("first")
    y.add_argument("second")

    s = sub.add_parser("sing", parents=[common], help="Z/N unfolding critical points")
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--z1", required=True)
    s.add_argument("--z2", default="0")

    q = sub.add_parser("pairing", parents=[common], help="Euler pairing and Serre relation")
    q.add_argument("--preset", default="pn")
    q.add_argument("--n", type=int, default=1, help="P^n")
    q.add_argument("--m-max", dest="m_max", type=int, default=3)
    q.add_argument("--samples", type=int, default=20)
    q.add_argument("--seed", type=int, default=0)
    return p


COMMANDS = {"ci": cmd_ci, "blowup": cmd_blowup, "atoms": cmd_atoms, "sing": cmd_sing, "pairing": cmd_pairing}


def render(rep: Report, args) -> str:
    if args.json:
        return json.dumps(rep.to_dict(), indent=2, ensure_ascii=False) + "\n"
    if args.csv:
        buf = io.StringIO()
        csv.writer(buf).writerows(rep.table)
        return buf.getvalue()
    return "\n".join(rep.lines) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    # the shared flag actions use SUPPRESS so they work before or after the subcommand
    for name in ("json", "csv", "tol", "out"):
        if not hasattr(args, name):
            setattr(args, name, False if name in ("json", "csv") else None)
    try:
        tol = resolve_tol(args.tol)
        rep = COMMANDS[args.cmd](args, tol)
        rep.inputs.setdefault("tol", tol)
        text = render(rep, args)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except AtomlabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError, TypeError) as exc:
        # json.JSONDecodeError is a ValueError
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
