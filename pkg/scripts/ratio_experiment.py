#!/usr/bin/env python3
"""Empirical per-round ratio distributions on random instances.

Runs the two deterministic rules over random coverage streams and prints
the worst per-prefix ratio seen, split by matroid kind, next to the proven
floors (0.25 for the exchange rule, 1/alpha_k for the capacity rule).
"""

import random
import sys

sys.path.insert(0, "src")

from subfree.algorithms import solve_alpha, step_general_matroid, step_k_uniform
from subfree.matroid import UniformMatroid
from subfree.oracle import prefix_optima, random_escalating_instance, random_instance
from subfree.tracker import OnlineState

TRIALS = 300


def worst_ratio(f, m, order, step):
    st = OnlineState(f, m)
    opts = prefix_optima(f, m, order)
    worst = 1.0
    for i, u in enumerate(order):
        step(st, u)
        if opts[i] > 0:
            worst = min(worst, float(st.f_S() / opts[i]))
    return worst


def main():
    rng = random.Random(1)
    by_kind = {}
    for _ in range(TRIALS):
        f, m, order = random_instance(rng, rng.randint(6, 12))
        w = worst_ratio(f, m, order, lambda st, u: step_general_matroid(st, u))
        kind = type(m).__name__
        by_kind[kind] = min(by_kind.get(kind, 1.0), w)
    print("exchange rule, floor 0.25:")
    for kind, w in sorted(by_kind.items()):
        print(f"  {kind:<18} worst ratio {w:.4f}")

    print("capacity rule, floor 1/alpha_k:")
    for k in (4, 6, 8):
        alpha = solve_alpha(k)
        worst = 1.0
        for t in range(TRIALS):
            local = random.Random(10_000 * k + t)
            if t % 2:
                f, order = random_escalating_instance(local, 12)
            else:
                f, _, order = random_instance(local, 12)
            worst = min(
                worst,
                worst_ratio(f, UniformMatroid(k), order,
                            lambda st, u: step_k_uniform(st, u, alpha)),
            )
        print(f"  k={k}  floor {alpha.ratio:.4f}  worst seen {worst:.4f}")


if __name__ == "__main__":
    main()
