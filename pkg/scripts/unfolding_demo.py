"""Critical points of x1^N + x2^N - z1 x1 x2 + z2 and their Z/N orbit structure."""
import argparse
from fractions import Fraction

from atomlab.singular import CyclicAction, PolyGerm, equivariant_milnor, ts_unfolding_atoms


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--N", type=int, nargs="*", default=[3, 4, 5, 6])
    ap.add_argument("--z1", type=Fraction, default=Fraction(1))
    ap.add_argument("--z2", type=Fraction, default=Fraction(0))
    args = ap.parse_args()
    for N in args.N:
        rep = ts_unfolding_atoms(N, args.z1, args.z2)
        germ = PolyGerm({(N, 0): 1, (0, N): 1}, 2)
        md = equivariant_milnor(germ, CyclicAction(N, (1, N - 1)))
        orbits = sorted((len(o.points), o.stabilizer) for o in rep.orbits)
        print(f"N={N}: {len(rep.points)} points (mu={md.mu}, muG={md.muG}), "
              f"{len(rep.clusters)} values, orbits {orbits}, formula {dict(rep.formula)}, "
              f"residual {rep.max_residual:.1e}")


if __name__ == "__main__":
    main()
