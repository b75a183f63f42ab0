"""Per-shell trace and observability constants for a few planar measures.

Prints the extreme Gram eigenvalues of an arc-length circle measure on the
circles |k|^2 = n that carry many lattice points, next to the cross-cluster
bound of the block sandwich.

    python3 demos/trace_constants.py
"""

from toraltrace import arith, lattice, measures as M, quadform as Q


def main():
    circle = M.Circle((0.0, 0.0), 0.2)
    print(f"{'n':>8} {'N':>4} {'lambda_min':>11} {'lambda_max':>11} {'cross':>7}")
    for bound in (5, 13, 17, 29, 37):
        n = arith.primorial_1mod4(bound)
        F = lattice.enumerate_shell(2, n).points
        lo, hi = Q.finite_support_constants(F, circle)
        split = Q.cluster_block_split(n, 2, circle)
        print(f"{n:>8} {len(F):>4} {lo:>11.4f} {hi:>11.4f} {split.cross_bound:>7.3f}")


if __name__ == "__main__":
    main()
