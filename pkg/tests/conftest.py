"""Shared fixtures and independent reference implementations.

The reference implementations here are deliberately written in a different
style from the package code (level-concatenation instead of incremental
frontiers, full objective re-evaluation instead of inverted-index gains) so
they can serve as oracles for it.
"""

from __future__ import annotations

import numpy as np
import pytest

from cabaret_sim.catalog import Catalog, RelationOracle


class CountingOracle(RelationOracle):
    """Relation oracle that counts queries, for query-budget assertions."""

    __slots__ = ("queries",)

    def __init__(self, catalog, w_max=50):
        super().__init__(catalog, w_max)
        self.queries = 0

    def related(self, content_id, width):
        self.queries += 1
        return super().related(content_id, width)


def random_catalog(
    rng: np.random.Generator, size: int, degree: int, with_weights: bool = True
) -> Catalog:
    """Uniform random related lists over ``size`` contents."""
    ids = [f"c{i:03d}" for i in range(size)]
    related = {}
    for i, cid in enumerate(ids):
        others = [x for x in ids if x != cid]
        deg = min(degree, len(others))
        picked = rng.choice(len(others), size=deg, replace=False)
        related[cid] = [others[j] for j in picked]
    weights = None
    if with_weights:
        weights = {cid: float(rng.random()) for cid in ids}
    return Catalog(related, weights)


def reference_bfs(seed, depth, width, oracle):
    """Level-order exploration by concatenate-then-deduplicate.

    Builds each level as the plain concatenation of the previous level's
    related lists, then removes already-seen entries keeping first
    occurrences.  Returns (entries, depths).
    """
    seen = {seed}
    entries, depths = [], []
    level = [seed]
    for d in range(1, depth + 1):
        raw = []
        for u in level:
            raw.extend(oracle.related(u, width))
        level = []
        for c in raw:
            if c not in seen:
                seen.add(c)
                level.append(c)
        entries.extend(level)
        depths.extend([d] * len(level))
        if not level:
            break
    return entries, depths


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(12345))
