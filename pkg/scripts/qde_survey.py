"""Survey Fano complete intersections: recover A both ways and time it."""
import argparse
import time

from atomlab.errors import InvalidCI
from atomlab.qde import CompleteIntersection, fit_jump_matrix_from_series, solve_jump_matrix


def cases(max_n):
    for N in range(3, max_n + 1):
        for degs in [(d,) for d in range(2, N)] + [(2, 2), (2, 3), (3, 3), (2, 2, 2)]:
            try:
                ci = CompleteIntersection(N, degs)
            except InvalidCI:
                continue
            if ci.index >= 1:
                yield ci


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-N", type=int, default=8)
    args = ap.parse_args()
    print(f"{'case':<22} {'dim':>3} {'f':>2} {'agree':>5} {'q-deg':>5} {'secs':>6}")
    for ci in cases(args.max_N):
        t = time.perf_counter()
        A = solve_jump_matrix(ci)
        B = fit_jump_matrix_from_series(ci)
        dt = time.perf_counter() - t
        print(f"{ci.label():<22} {ci.dim:>3} {ci.index:>2} {str(A == B):>5} {A.q_degree():>5} {dt:>6.2f}")


if __name__ == "__main__":
    main()
