"""End-to-end cubic fourfold run: QDE -> A, K -> spectrum -> atoms -> verdict."""
import argparse

from atomlab.atoms import hypersurface_atoms, nonrationality_verdict
from atomlab.exactalg import charpoly, matrix_str
from atomlab.fbundle import projector_defects, residual_kappa, spectral_split
from atomlab.qde import CompleteIntersection, build_qde, small_connection


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tol", type=float, default=1e-9)
    args = ap.parse_args()

    ci = CompleteIntersection(6, (3,))
    print(ci.label(), f"dim={ci.dim} index={ci.index}")
    print("QDE:", build_qde(ci))
    conn = small_connection(ci)
    print("cross-checks:", ", ".join(conn.checks))
    print("A =")
    for row in conn.A.to_strings():
        print("  ", row)
    K1 = residual_kappa(conn, 1)
    print("K|q=1 =")
    print(matrix_str(K1))
    print("charpoly:", charpoly(K1))

    split = spectral_split(K1, args.tol)
    for b in split:
        print(f"  block dim {b.dimension} at {b.eigenvalue:.6g}")
    worst = max(projector_defects(split, K1).values())
    print(f"projector defect {worst:.1e}")

    cf = hypersurface_atoms(ci, split)
    for atom, m in cf.items():
        print(f"  atom {atom.id}: P = {atom.hodge_poly}, rho = {atom.rho}, mult {m}")
    v = nonrationality_verdict(cf, ci.dim)
    print("verdict:", v.verdict, "witness:", v.witness)


if __name__ == "__main__":
    main()
