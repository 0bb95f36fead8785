"""Track the Bl_pt(P^3) eigenvalue clusters as epsilon and Qhat vary."""
import argparse
from fractions import Fraction

from atomlab.blowup import blp3pt, build_blowup_kappa, build_gr_kappa, cluster_verify, eigenvalues
from atomlab.errors import ClusterMismatch


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--qhat", nargs="*", default=["1", "8", "1/8", "0"])
    ap.add_argument("--eps", nargs="*", default=["0", "1/1000", "1/10", "1"])
    args = ap.parse_args()
    for q in map(Fraction, args.qhat):
        for e in map(Fraction, args.eps):
            s = blp3pt(Qhat=q, epsilon=e)
            M = build_blowup_kappa(s) if e else build_gr_kappa(s)
            try:
                rep = cluster_verify(M, s)
                status = f"sizes {rep.sizes} max offset {rep.max_offset:.2e}"
            except ClusterMismatch as exc:
                status = f"mismatch: {exc}"
            ev = ", ".join(f"{z:.4g}" for z in eigenvalues(M) if abs(z) > 1e-12) or "all zero"
            print(f"Qhat={q!s:>5} eps={e!s:>7}  {status}  nonzero: {ev}")


if __name__ == "__main__":
    main()
