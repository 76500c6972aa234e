import random

import hypothesis
import pytest

from subfree.objective import ExplicitTable, WeightedCoverage, subset_key

hypothesis.settings.register_profile(
    "default", max_examples=60, deadline=None, derandomize=True
)
hypothesis.settings.load_profile("default")


def random_coverage(rng: random.Random, n_elements: int, n_items: int = 6,
                    max_weight: int = 8) -> WeightedCoverage:
    """Random monotone coverage objective with small integer weights."""
    items = [f"x{i}" for i in range(n_items)]
    weights = {i: rng.randint(0, max_weight) for i in items}
    covers = {}
    for j in range(n_elements):
        size = rng.randint(1, max(1, n_items // 2))
        covers[f"e{j}"] = frozenset(rng.sample(items, size))
    return WeightedCoverage(weights, covers)


def coverage_as_table(cov: WeightedCoverage) -> ExplicitTable:
    ground = sorted(cov.elements())
    table = {}
    stack = [(frozenset(), 0)]
    while stack:
        s, i = stack.pop()
        table[subset_key(s)] = cov.value(s)
        for j in range(i, len(ground)):
            stack.append((s | {ground[j]}, j + 1))
    return ExplicitTable(ground, table)


@pytest.fixture
def rng():
    return random.Random(20240817)
