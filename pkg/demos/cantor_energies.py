"""Fractional energies of fat Cantor sets and of the irregular set.

Below the threshold 1 + ln 2 / ln alpha the one-sided energy stays under
the geometric bound; above it the increments grow.  The irregular set has
divergent energy for every eps.

    python3 demos/cantor_energies.py
"""

from toraltrace import sobolev as S


def main():
    alpha = 0.25
    print(f"threshold for alpha = {alpha}: {S.cantor_threshold(alpha):.3f}")
    for eps in (0.3, 0.49, 0.6):
        rep = S.cantor_bound_check(alpha, eps, 10)
        last = rep["rows"][-1]
        print(f"eps={eps:<5} partial={last['partial']:10.4f} bound={last['bound']:10.4f} "
              f"passed={rep['passed']} divergent_expected={rep['divergent_regime_expected']}")
    for N in (10**3, 10**4, 10**5):
        rep = S.irregular_divergence_audit(N, 0.5)
        print(f"irregular N={N:>6}: partial={rep['partial']:9.3f} growth over N/10 = {rep['growth_ratio']:.2f}")


if __name__ == "__main__":
    main()
