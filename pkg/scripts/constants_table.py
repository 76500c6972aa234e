#!/usr/bin/env python3
"""Print the threshold constants and the competitive ratios they imply."""

import sys

sys.path.insert(0, "src")

from subfree.algorithms import solve_alpha


def main():
    print("monotone capacity rule (rho=1)")
    print(f"{'k':>6} {'alpha_k':>10} {'1/alpha_k':>10}")
    for k in [4, 5, 6, 7, 8, 9, 10, 15, 20, 50, 100, 1000, "inf"]:
        a = solve_alpha(k)
        print(f"{str(k):>6} {a.value:>10.6f} {a.ratio:>10.6f}")

    print()
    print("non-monotone blown-up rule (rho=3), ratio includes the 1-1/rho thinning")
    print(f"{'k':>6} {'alpha_k':>10} {'ratio':>10}")
    for k in [1, 2, 4, 6, 9, 12, 20, 100, "inf"]:
        a = solve_alpha(k, rho=3)
        thinned = a.ratio * (1 - 1 / 3)
        marker = " <- best k" if k == 9 else ""
        print(f"{str(k):>6} {a.value:>10.6f} {thinned:>10.6f}{marker}")


if __name__ == "__main__":
    main()
