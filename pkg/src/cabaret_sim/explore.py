"""Level-order exploration of the relation graph around a seed content.

The exploration queries the oracle for the seed's related list, then for
the related lists of every newly discovered content, level by level, up to
a fixed depth.  Contents are recorded at their first discovery only;
re-discovered contents are skipped and are not expanded again, so the
number of oracle queries is bounded by one plus the number of contents
discovered before the final level.
"""

from __future__ import annotations

from dataclasses import dataclass

from .catalog import ContentId, RelationOracle
from .errors import ParameterError


@dataclass(frozen=True)
class BfsParams:
    """Exploration depth and per-query width."""

    depth: int
    width: int

    def __post_init__(self):
        if self.depth < 1:
            raise ParameterError(f"depth must be >= 1, got {self.depth}")
        if self.width < 1:
            raise ParameterError(f"width must be >= 1, got {self.width}")


@dataclass(frozen=True)
class ExplorationList:
    """Ordered exploration result with per-entry discovery depth.

    Entries are unique, never include the seed, and their depth annotations
    are non-decreasing along the list.
    """

    seed: ContentId
    entries: tuple[ContentId, ...]
    depths: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def at_depth(self, depth: int) -> tuple[ContentId, ...]:
        """Entries first discovered at ``depth``, in list order."""
        return tuple(e for e, d in zip(self.entries, self.depths) if d == depth)


def bfs(seed: ContentId, params: BfsParams, oracle: RelationOracle) -> ExplorationList:
    """Explore contents related to ``seed`` in level order.

    Level 1 is the seed's own related list in oracle order; level ``d + 1``
    appends, for each level-``d`` content in list order, its related list
    with already-seen contents (including the seed) skipped.
    """
    seen = {seed}
    entries: list[ContentId] = []
    depths: list[int] = []
    frontier: list[ContentId] = [seed]
    for depth in range(1, params.depth + 1):
        next_frontier: list[ContentId] = []
        for content in frontier:
            for found in oracle.related(content, params.width):
                if found in seen:
                    continue
                seen.add(found)
                entries.append(found)
                depths.append(depth)
                next_frontier.append(found)
        if not next_frontier:
            break
        frontier = next_frontier
    return ExplorationList(seed, tuple(entries), tuple(depths))


def depth_sets(
    seed: ContentId, params: BfsParams, oracle: RelationOracle
) -> list[set[ContentId]]:
    """First-discovery partition of the exploration, one set per depth.

    Always returns ``params.depth`` sets; trailing sets are empty when the
    exploration exhausts earlier.  The sets are pairwise disjoint and their
    union equals the set of explored entries.
    """
    result = bfs(seed, params, oracle)
    sets: list[set[ContentId]] = [set() for _ in range(params.depth)]
    for entry, depth in zip(result.entries, result.depths):
        sets[depth - 1].add(entry)
    return sets
