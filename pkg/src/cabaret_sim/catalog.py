"""Content catalog, ordered relation oracle, and dataset ingestion.

A catalog maps every content id to an ordered list of related content ids
(the provider's recommendation order) and to a non-negative popularity
weight.  Catalogs are immutable after construction and safe to share across
threads.

File formats
------------
Related lists are stored as JSON lines, one record per line::

    {"id": "v42", "related": ["v7", "v13", ...]}

Array order is the provider's recommendation order.  Popularity is a CSV
file with header ``id,weight``.  The canonical on-disk form sorts records
by id and preserves related arrays verbatim; ``save_dataset`` always emits
the canonical form.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import (
    DatasetFormatError,
    DuplicateContentError,
    ParameterError,
    UnknownContentError,
)

ContentId = str

#: Per-query cap on related-list length mirroring the provider API limit.
DEFAULT_W_MAX = 50


class Catalog:
    """Immutable content catalog: relations plus popularity weights.

    Ids referenced inside a related list but never defined themselves are
    added as leaf contents (empty related list, zero popularity), so a
    frontier-truncated crawl loads cleanly.

    Args:
        related: mapping from content id to its ordered related ids.
        popularity: optional mapping from content id to weight >= 0.
            Ids present here but not in ``related`` also become leaves.
    """

    __slots__ = ("_related", "_popularity")

    def __init__(
        self,
        related: Mapping[ContentId, Sequence[ContentId]],
        popularity: Mapping[ContentId, float] | None = None,
    ):
        rel: dict[ContentId, tuple[ContentId, ...]] = {}
        for cid, lst in related.items():
            entries = tuple(lst)
            seen = set()
            for entry in entries:
                if entry == cid:
                    raise DatasetFormatError(
                        f"related list of {cid!r} contains the content itself"
                    )
                if entry in seen:
                    raise DatasetFormatError(
                        f"related list of {cid!r} contains duplicate entry {entry!r}"
                    )
                seen.add(entry)
            rel[cid] = entries
        # Leaf closure: referenced-but-undefined ids become empty-list leaves.
        for entries in list(rel.values()):
            for entry in entries:
                if entry not in rel:
                    rel[entry] = ()
        pop: dict[ContentId, float] = {}
        if popularity is not None:
            for cid, weight in popularity.items():
                w = float(weight)
                if w < 0:
                    raise ParameterError(f"negative popularity weight for {cid!r}: {w}")
                if cid not in rel:
                    rel[cid] = ()
                pop[cid] = w
        self._related = rel
        self._popularity = {cid: pop.get(cid, 0.0) for cid in rel}

    def __len__(self) -> int:
        return len(self._related)

    def __contains__(self, content_id: object) -> bool:
        return content_id in self._related

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Catalog):
            return NotImplemented
        return (
            self._related == other._related and self._popularity == other._popularity
        )

    def ids(self) -> list[ContentId]:
        """All content ids in sorted order."""
        return sorted(self._related)

    def related_list(self, content_id: ContentId) -> tuple[ContentId, ...]:
        """The full stored related list of ``content_id``."""
        try:
            return self._related[content_id]
        except KeyError:
            raise UnknownContentError(content_id) from None

    def popularity_of(self, content_id: ContentId) -> float:
        try:
            return self._popularity[content_id]
        except KeyError:
            raise UnknownContentError(content_id) from None

    def normalized_weights(self, support: Iterable[ContentId]) -> dict[ContentId, float]:
        """Popularity weights over ``support``, rescaled to sum to 1.

        Falls back to a uniform distribution when the support carries zero
        total weight.
        """
        ids = list(support)
        if not ids:
            raise ParameterError("empty support")
        weights = [self.popularity_of(c) for c in ids]
        total = sum(weights)
        if total <= 0:
            return {c: 1.0 / len(ids) for c in ids}
        return {c: w / total for c, w in zip(ids, weights)}


@dataclass(frozen=True)
class PopularityRegion:
    """The most popular contents of a region, most popular first.

    ``truncated`` is set when more contents were requested than the catalog
    holds.
    """

    ids: tuple[ContentId, ...]
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.ids)


class RelationOracle:
    """Read-only query surface over a catalog's ordered related lists.

    Every query returns a prefix of the stored list, capped at ``w_max``
    entries per query (the provider API limit).  Identical queries always
    return identical lists.
    """

    __slots__ = ("catalog", "w_max")

    def __init__(self, catalog: Catalog, w_max: int = DEFAULT_W_MAX):
        if w_max < 1:
            raise ParameterError(f"w_max must be >= 1, got {w_max}")
        self.catalog = catalog
        self.w_max = w_max

    def related(self, content_id: ContentId, width: int) -> tuple[ContentId, ...]:
        """First ``min(width, w_max, len)`` related ids of ``content_id``.

        Raises:
            UnknownContentError: if the id is not in the catalog.
            ParameterError: if ``width < 1``.
        """
        if width < 1:
            raise ParameterError(f"width must be >= 1, got {width}")
        return self.catalog.related_list(content_id)[: min(width, self.w_max)]


def top_popular(catalog: Catalog, count: int) -> PopularityRegion:
    """The ``count`` highest-weight contents, ties broken by id order.

    When ``count`` exceeds the catalog size the result is truncated to the
    whole catalog and flagged.
    """
    if count < 1:
        raise ParameterError(f"count must be >= 1, got {count}")
    ranked = sorted(catalog.ids(), key=lambda c: (-catalog.popularity_of(c), c))
    return PopularityRegion(tuple(ranked[:count]), truncated=count > len(ranked))


def _parse_related_line(line: str, lineno: int) -> tuple[ContentId, list[ContentId]]:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise DatasetFormatError(f"invalid JSON ({exc.msg})", line=lineno) from None
    if not isinstance(record, dict):
        raise DatasetFormatError("record is not an object", line=lineno)
    if "id" not in record or "related" not in record:
        raise DatasetFormatError('record must have "id" and "related" keys', line=lineno)
    cid = record["id"]
    rel = record["related"]
    if not isinstance(cid, str) or not cid:
        raise DatasetFormatError('"id" must be a non-empty string', line=lineno)
    if not isinstance(rel, list) or not all(isinstance(x, str) for x in rel):
        raise DatasetFormatError('"related" must be an array of strings', line=lineno)
    return cid, rel


def load_related_file(path: str) -> dict[ContentId, list[ContentId]]:
    """Parse a JSON-lines related-lists file into an ordered mapping."""
    related: dict[ContentId, list[ContentId]] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            cid, rel = _parse_related_line(line, lineno)
            if cid in related:
                raise DuplicateContentError(
                    f"content {cid!r} defined more than once", line=lineno
                )
            related[cid] = rel
    return related


def load_popularity_file(path: str) -> dict[ContentId, float]:
    """Parse an ``id,weight`` CSV file into a popularity mapping."""
    popularity: dict[ContentId, float] = {}
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["id", "weight"]:
            raise DatasetFormatError('popularity file must start with header "id,weight"', line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise DatasetFormatError(f"expected 2 fields, got {len(row)}", line=lineno)
            cid, raw = row[0], row[1]
            if cid in popularity:
                raise DuplicateContentError(
                    f"popularity for {cid!r} defined more than once", line=lineno
                )
            try:
                weight = float(raw)
            except ValueError:
                raise DatasetFormatError(f"invalid weight {raw!r}", line=lineno) from None
            if weight < 0:
                raise DatasetFormatError(f"negative weight {raw!r}", line=lineno)
            popularity[cid] = weight
    return popularity


def load_dataset(related_path: str, popularity_path: str | None = None) -> Catalog:
    """Build a catalog from a related-lists file and optional popularity file."""
    related = load_related_file(related_path)
    popularity = load_popularity_file(popularity_path) if popularity_path else None
    return Catalog(related, popularity)


def dumps_related(catalog: Catalog) -> str:
    """Canonical related-lists serialization: records sorted by id."""
    out = io.StringIO()
    for cid in catalog.ids():
        json.dump(
            {"id": cid, "related": list(catalog.related_list(cid))},
            out,
            separators=(",", ":"),
        )
        out.write("\n")
    return out.getvalue()


def dumps_popularity(catalog: Catalog) -> str:
    """Canonical popularity serialization: ``id,weight`` rows sorted by id."""
    out = io.StringIO()
    out.write("id,weight\n")
    for cid in catalog.ids():
        out.write(f"{cid},{catalog.popularity_of(cid)!r}\n")
    return out.getvalue()


def save_dataset(
    catalog: Catalog, related_path: str, popularity_path: str | None = None
) -> None:
    """Write the catalog in canonical form (see module docstring)."""
    with open(related_path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(dumps_related(catalog))
    if popularity_path is not None:
        with open(popularity_path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(dumps_popularity(catalog))
