"""Cache placement: hit-ratio objective, greedy and exact solvers.

The objective values a cache set by the probability that a user's next
request is served from it: for every demand-support content, the number of
cached contents inside that content's exploration list (capped at the
recommendation-list length) determines how much position-probability mass
the cache collects, weighted by the content's demand share.

The objective is monotone and submodular, so the greedy maximizer is run
with lazy evaluation: stale marginal gains are kept in a max-heap and only
the top candidate is re-evaluated, which is valid because gains can only
shrink as the chosen set grows.  Its output is identical to naive greedy
under the same tie-break (smallest content id).  A guarded brute-force
solver provides exact optima for small instances.

Exploration lists are computed once per spec; marginal gains then use an
inverted index (content -> demand contents whose exploration contains it),
so one gain evaluation touches only the affected demand rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from heapq import heapify, heappop, heappush
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np

from .catalog import Catalog, ContentId, RelationOracle, top_popular
from .demand import PositionDistribution
from .errors import InstanceTooLargeError, ParameterError
from .explore import BfsParams, bfs


class ObjectiveSpec:
    """Frozen inputs of the placement objective.

    Holds the demand support with normalized weights, the position
    probabilities, the per-content exploration sets, and the inverted
    index used for fast marginal gains.  Build once, evaluate many times.
    """

    __slots__ = (
        "support",
        "weights",
        "list_size",
        "prefix_mass",
        "table",
        "inverted",
        "universe",
    )

    def __init__(
        self,
        support: Sequence[ContentId],
        weights: Sequence[float],
        list_size: int,
        probs: Sequence[float],
        table: Mapping[ContentId, frozenset[ContentId]],
    ):
        if not support:
            raise ParameterError("empty demand support")
        if len(weights) != len(support):
            raise ParameterError("weights must align with support")
        self.support = tuple(support)
        total = float(sum(weights))
        if total <= 0:
            raise ParameterError("support weights must have positive total")
        self.weights = tuple(w / total for w in weights)
        self.list_size = list_size
        mass = [0.0]
        for p in probs[:list_size]:
            mass.append(mass[-1] + p)
        while len(mass) < list_size + 1:
            mass.append(mass[-1])
        self.prefix_mass = tuple(mass)
        self.table = {v: frozenset(table[v]) for v in self.support}
        inverted: dict[ContentId, list[int]] = {}
        for i, v in enumerate(self.support):
            for c in self.table[v]:
                inverted.setdefault(c, []).append(i)
        self.inverted = {c: tuple(rows) for c, rows in inverted.items()}
        self.universe = tuple(sorted(self.inverted))

    @classmethod
    def build(
        cls,
        support: Sequence[ContentId],
        list_size: int,
        dist: PositionDistribution,
        params: BfsParams,
        oracle: RelationOracle,
        weights: Mapping[ContentId, float] | None = None,
    ) -> "ObjectiveSpec":
        """Explore every support content and assemble the spec.

        ``weights=None`` means uniform demand over the support.
        """
        support = tuple(support)
        if weights is None:
            w = [1.0] * len(support)
        else:
            w = [float(weights[v]) for v in support]
        table = {v: frozenset(bfs(v, params, oracle).entries) for v in support}
        return cls(support, w, list_size, dist.probs, table)

    def counts(self, cache_ids: Iterable[ContentId]) -> list[int]:
        """Per-support-row count of cached contents inside the exploration."""
        rows = [0] * len(self.support)
        for c in set(cache_ids):
            for i in self.inverted.get(c, ()):
                rows[i] += 1
        return rows

    def value_of_counts(self, rows: Sequence[int]) -> float:
        cap = self.list_size
        mass = self.prefix_mass
        return sum(
            q * mass[n if n < cap else cap] for q, n in zip(self.weights, rows)
        )

    def gain(self, content: ContentId, rows: Sequence[int]) -> float:
        """Marginal objective increase of adding ``content`` given row counts."""
        cap = self.list_size
        mass = self.prefix_mass
        total = 0.0
        for i in self.inverted.get(content, ()):
            n = rows[i]
            if n < cap:
                total += self.weights[i] * (mass[n + 1] - mass[n])
        return total

    def add_to_counts(self, content: ContentId, rows: list[int]) -> None:
        for i in self.inverted.get(content, ()):
            rows[i] += 1


def objective(spec: ObjectiveSpec, cache_ids: Iterable[ContentId]) -> float:
    """Expected next-request hit probability of ``cache_ids`` under ``spec``."""
    return spec.value_of_counts(spec.counts(cache_ids))


@dataclass(frozen=True)
class PlacementResult:
    """A chosen cache set with its objective trajectory.

    ``chosen`` is in selection order for greedy and top placements and in
    id order for the exact solver.  ``filled`` counts trailing slots that
    were topped up in id order after every remaining candidate's marginal
    gain hit zero.
    """

    method: str
    chosen: tuple[ContentId, ...]
    objective_values: tuple[float, ...]
    gains: tuple[float, ...]
    filled: int = 0

    def __len__(self) -> int:
        return len(self.chosen)

    def trajectory_rows(self) -> list[tuple[int, ContentId, float]]:
        return [
            (step, cid, value)
            for step, (cid, value) in enumerate(
                zip(self.chosen, self.objective_values), start=1
            )
        ]


def _resolve_candidates(
    spec: ObjectiveSpec, candidates: Iterable[ContentId] | None
) -> tuple[list[ContentId], list[ContentId]]:
    """Split candidates into useful (inside the explored universe) and the rest."""
    if candidates is None:
        return list(spec.universe), []
    pool = sorted(set(candidates))
    useful = [c for c in pool if c in spec.inverted]
    rest = [c for c in pool if c not in spec.inverted]
    return useful, rest


def greedy_placement(
    spec: ObjectiveSpec,
    capacity: int,
    candidates: Iterable[ContentId] | None = None,
) -> PlacementResult:
    """Pick ``capacity`` contents by repeated best-marginal-gain selection.

    Ties break toward the smallest content id.  Once every remaining
    candidate's gain is zero, the remaining slots are filled in id order
    and reported via ``filled``.
    """
    if capacity < 1:
        raise ParameterError(f"capacity must be >= 1, got {capacity}")
    useful, rest = _resolve_candidates(spec, candidates)
    rows = [0] * len(spec.support)
    chosen: list[ContentId] = []
    values: list[float] = []
    gains: list[float] = []

    heap = [(-spec.gain(c, rows), c, 0) for c in useful]
    heapify(heap)
    while len(chosen) < capacity and heap:
        neg, cid, epoch = heappop(heap)
        gain = -neg if epoch == len(chosen) else spec.gain(cid, rows)
        if heap:
            next_neg, next_cid, _ = heap[0]
            stale_next = -next_neg
            if gain < stale_next or (gain == stale_next and next_cid < cid):
                heappush(heap, (-gain, cid, len(chosen)))
                continue
        if gain <= 0.0:
            heappush(heap, (-gain, cid, len(chosen)))
            break
        chosen.append(cid)
        spec.add_to_counts(cid, rows)
        values.append(spec.value_of_counts(rows))
        gains.append(gain)

    filled = 0
    if len(chosen) < capacity:
        remaining = set(c for _, c, _ in heap) | set(rest)
        pool = sorted(remaining - set(chosen))
        flat = values[-1] if values else 0.0
        for cid in pool[: capacity - len(chosen)]:
            chosen.append(cid)
            values.append(flat)
            gains.append(0.0)
            filled += 1
    return PlacementResult(
        "greedy", tuple(chosen), tuple(values), tuple(gains), filled
    )


def exact_placement(
    spec: ObjectiveSpec,
    capacity: int,
    candidates: Iterable[ContentId] | None = None,
    guard: int = 10_000_000,
) -> PlacementResult:
    """Exhaustive search for the best cache set of at most ``capacity``.

    Ties resolve to the lexicographically smallest set.  Refuses instances
    whose subset count exceeds ``guard``.
    """
    if capacity < 1:
        raise ParameterError(f"capacity must be >= 1, got {capacity}")
    useful, _ = _resolve_candidates(spec, candidates)
    if capacity >= len(useful):
        best = tuple(useful)
    else:
        n_subsets = math.comb(len(useful), capacity)
        if n_subsets > guard:
            raise InstanceTooLargeError(
                f"{n_subsets} subsets exceed the brute-force guard ({guard})"
            )
        best_value = -1.0
        best = ()
        for combo in combinations(useful, capacity):
            value = spec.value_of_counts(spec.counts(combo))
            if value > best_value:
                best_value = value
                best = combo
    rows = [0] * len(spec.support)
    values: list[float] = []
    gains: list[float] = []
    for cid in best:
        before = spec.value_of_counts(rows)
        spec.add_to_counts(cid, rows)
        after = spec.value_of_counts(rows)
        values.append(after)
        gains.append(after - before)
    return PlacementResult("exact", best, tuple(values), tuple(gains))


def top_placement(
    catalog: Catalog, capacity: int, spec: ObjectiveSpec | None = None
) -> PlacementResult:
    """Cache the ``capacity`` most popular contents.

    The objective trajectory is reported when a spec is supplied.
    """
    region = top_popular(catalog, capacity)
    values: list[float] = []
    gains: list[float] = []
    if spec is not None:
        rows = [0] * len(spec.support)
        for cid in region.ids:
            before = spec.value_of_counts(rows)
            spec.add_to_counts(cid, rows)
            after = spec.value_of_counts(rows)
            values.append(after)
            gains.append(after - before)
    return PlacementResult("top", region.ids, tuple(values), tuple(gains))


@dataclass(frozen=True)
class SubmodularityReport:
    """Outcome of randomized monotonicity / diminishing-returns checks."""

    trials: int
    violations: int
    max_violation: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return self.violations == 0


def check_submodularity(
    spec: ObjectiveSpec,
    trials: int = 10_000,
    seed: int = 0,
    tolerance: float = 1e-12,
) -> SubmodularityReport:
    """Sample nested sets and verify diminishing returns and monotonicity.

    Each trial draws ``A subset-of B`` from the explored universe and an
    element ``x`` outside ``B``, then checks ``gain(A, x) >= gain(B, x)``
    and ``objective(A) <= objective(B)`` within ``tolerance``.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    universe = list(spec.universe)
    if len(universe) < 2:
        raise ParameterError("universe too small for submodularity sampling")
    max_b = min(len(universe) - 1, 12)
    violations = 0
    worst = 0.0
    for _ in range(trials):
        b_size = int(rng.integers(0, max_b + 1))
        picked = rng.choice(len(universe), size=b_size, replace=False)
        b_set = [universe[i] for i in picked]
        a_set = b_set[: int(rng.integers(0, b_size + 1))]
        while True:
            x = universe[int(rng.integers(len(universe)))]
            if x not in b_set:
                break
        rows_a = spec.counts(a_set)
        rows_b = spec.counts(b_set)
        gain_gap = spec.gain(x, rows_b) - spec.gain(x, rows_a)
        mono_gap = spec.value_of_counts(rows_a) - spec.value_of_counts(rows_b)
        gap = max(gain_gap, mono_gap)
        if gap > tolerance:
            violations += 1
        worst = max(worst, gap)
    return SubmodularityReport(trials, violations, worst, tolerance)
