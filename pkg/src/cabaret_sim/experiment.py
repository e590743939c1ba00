"""Experiment orchestration: config parsing, scenario sweeps, CSV output.

A configuration is a flat JSON object.  Four keys are sweepable
(``recommender``, ``cache_capacity``, ``demand``, ``session_length``)
and may hold either a scalar or a non-empty array; the experiment runs one
scenario cell per element of their cross product, in that key order.  All
other keys are scalars.  Schema (defaults in parentheses):

========================  =====================================================
``seed``                  master RNG seed, required
``catalog_kind``          ``"synthetic"`` or ``"files"`` (``synthetic``)
``catalog_size``          synthetic: number of contents
``catalog_out_degree``    synthetic: related-list length
``catalog_overlap``       synthetic: depth-overlap target in [0, 1]
``catalog_seed``          synthetic: generator seed (derived from ``seed``)
``catalog_related_file``  files: JSON-lines related lists path
``catalog_popularity_file``  files: ``id,weight`` CSV path (optional)
``w_max``                 per-query related-list cap (50)
``front_page_size``       entry-page size (50)
``recommender``           sweep: ``baseline`` | ``reordered`` | ``cabaret``
``bfs_depth``             exploration depth (2)
``bfs_width``             exploration width (50)
``list_size``             recommendation-list length N (20)
``cache_policy``          ``top`` | ``greedy`` | ``exact`` (``top``)
``cache_capacity``        sweep: cache sizes
``demand``                sweep: ``uniform`` or ``zipf:<alpha>``
``session_length``        sweep: requests per session K, >= 2
``sessions``              Monte-Carlo sessions M per sampled cell (1000)
``evaluator``             ``auto`` | ``sampled`` | ``exact`` (``auto``)
``workers``               concurrent cells (1)
========================  =====================================================

``auto`` evaluates two-request cells exactly (closed form over all starting
contents) and samples longer sessions; ``exact`` propagates the watched-
content distribution exactly for every cell, which makes reruns and
cross-recommender comparisons noise-free.

Each cell's RNG seed is ``sha256("<seed>|recommender=<r>|capacity=<c>|``
``demand=<d>|k=<k>")``, first 8 bytes big-endian, so adding sweep values
never perturbs existing cells.  Reruns of the same config produce
byte-identical ``results.csv``.
"""

from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .catalog import Catalog, PopularityRegion, RelationOracle, load_dataset, top_popular
from .demand import (
    PositionDistribution,
    Recommender,
    exact_hit_rates,
    position_probs,
    run_session,
)
from .errors import ConfigError
from .explore import BfsParams, bfs
from .metrics import ChrReport, chr_sequential
from .placement import ObjectiveSpec, exact_placement, greedy_placement
from .recommend import (
    CacheManifest,
    baseline_recommender,
    reordered_recommender,
    select_from_exploration,
)
from .synthetic import generate_synthetic
from .version import __version__

RECOMMENDER_KINDS = ("baseline", "reordered", "cabaret")
CACHE_POLICIES = ("top", "greedy", "exact")
EVALUATORS = ("auto", "sampled", "exact")

_SCALAR_KEYS = {
    "seed",
    "catalog_kind",
    "catalog_size",
    "catalog_out_degree",
    "catalog_overlap",
    "catalog_seed",
    "catalog_related_file",
    "catalog_popularity_file",
    "w_max",
    "front_page_size",
    "bfs_depth",
    "bfs_width",
    "list_size",
    "cache_policy",
    "sessions",
    "evaluator",
    "workers",
}
_SWEEP_KEYS = ("recommender", "cache_capacity", "demand", "session_length")


def parse_demand(label: str) -> tuple[str, float]:
    """Split a demand label into (kind, alpha); raises on malformed labels."""
    if label == "uniform":
        return "uniform", 0.0
    if label.startswith("zipf:"):
        try:
            alpha = float(label.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"invalid demand label {label!r}") from None
        if alpha < 0:
            raise ConfigError(f"zipf alpha must be >= 0 in {label!r}")
        return "zipf", alpha
    raise ConfigError(f"invalid demand label {label!r} (use 'uniform' or 'zipf:<alpha>')")


def _demand_dist(label: str, list_size: int) -> PositionDistribution:
    kind, alpha = parse_demand(label)
    return position_probs(kind, alpha, list_size)


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated, normalized experiment configuration."""

    seed: int
    catalog_kind: str
    recommenders: tuple[str, ...]
    capacities: tuple[int, ...]
    demands: tuple[str, ...]
    session_lengths: tuple[int, ...]
    catalog_size: int | None = None
    catalog_out_degree: int | None = None
    catalog_overlap: float | None = None
    catalog_seed: int | None = None
    catalog_related_file: str | None = None
    catalog_popularity_file: str | None = None
    w_max: int = 50
    front_page_size: int = 50
    bfs_depth: int = 2
    bfs_width: int = 50
    list_size: int = 20
    cache_policy: str = "top"
    sessions: int = 1000
    evaluator: str = "auto"
    workers: int = 1

    def to_mapping(self) -> dict[str, Any]:
        """The flat JSON form of this config (sweeps as arrays)."""
        out: dict[str, Any] = {
            "seed": self.seed,
            "catalog_kind": self.catalog_kind,
            "w_max": self.w_max,
            "front_page_size": self.front_page_size,
            "recommender": list(self.recommenders),
            "bfs_depth": self.bfs_depth,
            "bfs_width": self.bfs_width,
            "list_size": self.list_size,
            "cache_policy": self.cache_policy,
            "cache_capacity": list(self.capacities),
            "demand": list(self.demands),
            "session_length": list(self.session_lengths),
            "sessions": self.sessions,
            "evaluator": self.evaluator,
            "workers": self.workers,
        }
        for key in (
            "catalog_size",
            "catalog_out_degree",
            "catalog_overlap",
            "catalog_seed",
            "catalog_related_file",
            "catalog_popularity_file",
        ):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        return out


def _as_list(value: Any) -> list[Any]:
    return list(value) if isinstance(value, list) else [value]


def config_from_mapping(raw: Mapping[str, Any]) -> ExperimentConfig:
    """Validate a flat config mapping and normalize sweeps to tuples."""
    unknown = set(raw) - _SCALAR_KEYS - set(_SWEEP_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "seed" not in raw or not isinstance(raw["seed"], int):
        raise ConfigError("config must set an integer 'seed'")
    for key in _SWEEP_KEYS:
        if key not in raw:
            raise ConfigError(f"config must set {key!r}")
        if isinstance(raw[key], list) and not raw[key]:
            raise ConfigError(f"sweep {key!r} must be non-empty")

    recommenders = tuple(_as_list(raw["recommender"]))
    for r in recommenders:
        if r not in RECOMMENDER_KINDS:
            raise ConfigError(f"unknown recommender {r!r}")
    capacities = tuple(_as_list(raw["cache_capacity"]))
    if not all(isinstance(c, int) and c >= 1 for c in capacities):
        raise ConfigError("cache_capacity values must be integers >= 1")
    demands = tuple(str(d) for d in _as_list(raw["demand"]))
    for d in demands:
        parse_demand(d)
    lengths = tuple(_as_list(raw["session_length"]))
    if not all(isinstance(k, int) and k >= 2 for k in lengths):
        raise ConfigError("session_length values must be integers >= 2")

    kind = raw.get("catalog_kind", "synthetic")
    if kind == "synthetic":
        for key in ("catalog_size", "catalog_out_degree", "catalog_overlap"):
            if key not in raw:
                raise ConfigError(f"synthetic catalog requires {key!r}")
    elif kind == "files":
        if "catalog_related_file" not in raw:
            raise ConfigError("files catalog requires 'catalog_related_file'")
        for key in ("catalog_related_file", "catalog_popularity_file"):
            path = raw.get(key)
            if path is not None and not Path(path).is_file():
                raise ConfigError(f"{key} does not exist: {path}")
    else:
        raise ConfigError(f"unknown catalog_kind {kind!r}")

    policy = raw.get("cache_policy", "top")
    if policy not in CACHE_POLICIES:
        raise ConfigError(f"unknown cache_policy {policy!r}")
    evaluator = raw.get("evaluator", "auto")
    if evaluator not in EVALUATORS:
        raise ConfigError(f"unknown evaluator {evaluator!r}")
    sessions = raw.get("sessions", 1000)
    if not isinstance(sessions, int) or sessions < 1:
        raise ConfigError("sessions must be an integer >= 1")
    workers = raw.get("workers", 1)
    if not isinstance(workers, int) or workers < 1:
        raise ConfigError("workers must be an integer >= 1")

    return ExperimentConfig(
        seed=raw["seed"],
        catalog_kind=kind,
        recommenders=recommenders,
        capacities=capacities,
        demands=demands,
        session_lengths=lengths,
        catalog_size=raw.get("catalog_size"),
        catalog_out_degree=raw.get("catalog_out_degree"),
        catalog_overlap=raw.get("catalog_overlap"),
        catalog_seed=raw.get("catalog_seed"),
        catalog_related_file=raw.get("catalog_related_file"),
        catalog_popularity_file=raw.get("catalog_popularity_file"),
        w_max=raw.get("w_max", 50),
        front_page_size=raw.get("front_page_size", 50),
        bfs_depth=raw.get("bfs_depth", 2),
        bfs_width=raw.get("bfs_width", 50),
        list_size=raw.get("list_size", 20),
        cache_policy=policy,
        sessions=sessions,
        evaluator=evaluator,
        workers=workers,
    )


def load_config(path: str) -> ExperimentConfig:
    """Load and validate a flat JSON config file."""
    try:
        with open(path, encoding="utf-8") as handle:
            raw = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    return config_from_mapping(raw)


@dataclass(frozen=True)
class CellSpec:
    """Coordinates of one scenario cell."""

    recommender: str
    capacity: int
    demand: str
    session_length: int


def iter_cells(config: ExperimentConfig) -> list[CellSpec]:
    """All scenario cells in canonical sweep order."""
    return [
        CellSpec(r, c, d, k)
        for r in config.recommenders
        for c in config.capacities
        for d in config.demands
        for k in config.session_lengths
    ]


def derive_cell_seed(master: int, cell: CellSpec) -> int:
    """Stable per-cell seed: sha256 over master seed and cell coordinates."""
    key = (
        f"{master}|recommender={cell.recommender}|capacity={cell.capacity}"
        f"|demand={cell.demand}|k={cell.session_length}"
    )
    return int.from_bytes(hashlib.sha256(key.encode("utf-8")).digest()[:8], "big")


def derive_catalog_seed(master: int) -> int:
    key = f"{master}|catalog"
    return int.from_bytes(hashlib.sha256(key.encode("utf-8")).digest()[:8], "big")


def build_catalog(config: ExperimentConfig) -> Catalog:
    if config.catalog_kind == "synthetic":
        seed = config.catalog_seed
        if seed is None:
            seed = derive_catalog_seed(config.seed)
        return generate_synthetic(
            config.catalog_size, config.catalog_out_degree, config.catalog_overlap, seed
        )
    return load_dataset(config.catalog_related_file, config.catalog_popularity_file)


@dataclass
class ExperimentResult:
    """All scenario rows plus run metadata.

    ``rows`` holds one mapping per successful cell in canonical sweep
    order; ``failures`` one mapping per aborted cell.  Timing lives here
    and never in ``results.csv`` so reruns stay byte-identical.
    """

    rows: list[dict[str, Any]]
    failures: list[dict[str, Any]]
    config: ExperimentConfig
    version: str
    wall_clock: float


class _Runner:
    """Shared immutable state for evaluating scenario cells."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.catalog = build_catalog(config)
        self.oracle = RelationOracle(self.catalog, config.w_max)
        self.params = BfsParams(config.bfs_depth, config.bfs_width)
        self.front_page: PopularityRegion = top_popular(
            self.catalog, config.front_page_size
        )
        self._exploration: dict[str, tuple[str, ...]] = {}
        self._specs: dict[str, ObjectiveSpec] = {}
        self._placements: dict[tuple[int, str], CacheManifest] = {}
        self._recommenders: dict[tuple[str, int, str], Recommender] = {}

    def exploration(self, content: str) -> tuple[str, ...]:
        entries = self._exploration.get(content)
        if entries is None:
            entries = bfs(content, self.params, self.oracle).entries
            self._exploration[content] = entries
        return entries

    def objective_spec(self, demand: str) -> ObjectiveSpec:
        spec = self._specs.get(demand)
        if spec is None:
            dist = _demand_dist(demand, self.config.list_size)
            table = {
                v: frozenset(self.exploration(v)) for v in self.front_page.ids
            }
            spec = ObjectiveSpec(
                self.front_page.ids,
                [1.0] * len(self.front_page.ids),
                self.config.list_size,
                dist.probs,
                table,
            )
            self._specs[demand] = spec
        return spec

    def _placement_key(self, capacity: int, demand: str) -> tuple[int, str]:
        # Top placement ignores demand; share it across demand values.
        return (capacity, demand if self.config.cache_policy != "top" else "")

    def placement(self, capacity: int, demand: str) -> CacheManifest:
        key = self._placement_key(capacity, demand)
        manifest = self._placements.get(key)
        if manifest is None:
            policy = self.config.cache_policy
            if policy == "top":
                chosen = top_popular(self.catalog, capacity).ids
            elif policy == "greedy":
                chosen = greedy_placement(self.objective_spec(demand), capacity).chosen
            else:
                chosen = exact_placement(self.objective_spec(demand), capacity).chosen
            manifest = CacheManifest.from_ids(chosen, capacity)
            self._placements[key] = manifest
        return manifest

    def recommender(self, kind: str, capacity: int, demand: str) -> Recommender:
        key = (kind, *self._placement_key(capacity, demand))
        memoized = self._recommenders.get(key)
        if memoized is not None:
            return memoized
        cache = self.placement(capacity, demand)
        n = self.config.list_size
        if kind == "cabaret":
            def rec(v: str) -> Any:
                return select_from_exploration(self.exploration(v), n, cache)
        elif kind == "baseline":
            def rec(v: str) -> Any:
                return baseline_recommender(v, n, self.oracle, cache)
        else:
            def rec(v: str) -> Any:
                return reordered_recommender(v, n, cache, self.oracle)
        memoized = lru_cache(maxsize=None)(rec)
        self._recommenders[key] = memoized
        return memoized

    def evaluate(self, cell: CellSpec) -> dict[str, Any]:
        config = self.config
        dist = _demand_dist(cell.demand, config.list_size)
        cache = self.placement(cell.capacity, cell.demand)
        rec = self.recommender(cell.recommender, cell.capacity, cell.demand)
        exact = config.evaluator == "exact" or (
            config.evaluator == "auto" and cell.session_length == 2
        )
        if exact:
            rates = exact_hit_rates(self.front_page, rec, dist, cell.session_length)
            report = ChrReport.from_exact(rates, cell.session_length)
            se = None
        else:
            rng = np.random.Generator(np.random.PCG64(derive_cell_seed(config.seed, cell)))
            sessions = [
                run_session(
                    cell.session_length, self.front_page, rec, dist,
                    rng=rng, cache=cache,
                )
                for _ in range(config.sessions)
            ]
            report = chr_sequential(sessions)
            steps = cell.session_length - 1
            means = np.array([sum(s.hits[1:]) / steps for s in sessions])
            se = float(np.std(means, ddof=1) / np.sqrt(len(sessions))) if len(sessions) > 1 else 0.0
        row: dict[str, Any] = {
            "recommender": cell.recommender,
            "cache_policy": config.cache_policy,
            "cache_capacity": cell.capacity,
            "demand": cell.demand,
            "k": cell.session_length,
            "evaluator": report.mode,
            "sessions": report.sessions,
            "chr": report.chr,
            "chr_se": se,
        }
        for k, rate in report.per_step_rows():
            row[f"hit_rate_k{k}"] = rate
        return row


def _fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def results_columns(config: ExperimentConfig) -> list[str]:
    max_k = max(config.session_lengths)
    return [
        "recommender",
        "cache_policy",
        "cache_capacity",
        "demand",
        "k",
        "evaluator",
        "sessions",
        "chr",
        "chr_se",
        *(f"hit_rate_k{k}" for k in range(2, max_k + 1)),
    ]


FAILURE_COLUMNS = [
    "recommender",
    "cache_policy",
    "cache_capacity",
    "demand",
    "k",
    "error",
    "message",
]


def _write_csv(path: Path, columns: list[str], rows: list[dict[str, Any]]) -> None:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(row.get(col)) for col in columns))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


_INT_COLUMNS = {"cache_capacity", "k", "sessions"}
_FLOAT_COLUMNS_PREFIX = ("chr", "hit_rate_k")


def read_results_csv(path: str | Path) -> list[dict[str, Any]]:
    """Load a ``results.csv`` back into typed row mappings (lossless)."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    columns = lines[0].split(",")
    rows: list[dict[str, Any]] = []
    for line in lines[1:]:
        row: dict[str, Any] = {}
        for col, field in zip(columns, line.split(",")):
            if field == "":
                continue
            if col in _INT_COLUMNS:
                row[col] = int(field)
            elif col.startswith(_FLOAT_COLUMNS_PREFIX):
                row[col] = float(field)
            else:
                row[col] = field
        rows.append(row)
    return rows


def run_experiment(
    config: ExperimentConfig,
    out_dir: str | Path | None = None,
    workers: int | None = None,
) -> ExperimentResult:
    """Evaluate every scenario cell and optionally persist CSV outputs.

    A failing cell is recorded in the failures table and does not stop the
    others.  Results are returned (and written) in canonical sweep order
    regardless of the worker count.
    """
    start = time.perf_counter()
    runner = _Runner(config)
    cells = iter_cells(config)
    # Placements are built up front, single-threaded, so worker scheduling
    # can never reorder their construction.
    placement_failures: dict[tuple[int, str], Exception] = {}
    for cell in cells:
        key = (cell.capacity, cell.demand)
        if key in placement_failures:
            continue
        try:
            runner.placement(cell.capacity, cell.demand)
        except Exception as exc:
            placement_failures[key] = exc

    def evaluate(cell: CellSpec) -> tuple[dict[str, Any] | None, dict[str, Any] | None]:
        failure = placement_failures.get((cell.capacity, cell.demand))
        if failure is None:
            try:
                return runner.evaluate(cell), None
            except Exception as exc:
                failure = exc
        return None, {
            "recommender": cell.recommender,
            "cache_policy": config.cache_policy,
            "cache_capacity": cell.capacity,
            "demand": cell.demand,
            "k": cell.session_length,
            "error": type(failure).__name__,
            "message": str(failure).replace("\n", " ").replace(",", ";"),
        }

    n_workers = workers if workers is not None else config.workers
    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            outcomes = list(pool.map(evaluate, cells))
    else:
        outcomes = [evaluate(cell) for cell in cells]

    rows = [row for row, _ in outcomes if row is not None]
    failures = [fail for _, fail in outcomes if fail is not None]
    result = ExperimentResult(
        rows=rows,
        failures=failures,
        config=config,
        version=__version__,
        wall_clock=time.perf_counter() - start,
    )
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(out / "results.csv", results_columns(config), rows)
        _write_csv(out / "failures.csv", FAILURE_COLUMNS, failures)
        (out / "config.json").write_text(
            json.dumps(config.to_mapping(), sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
            newline="\n",
        )
    return result
