from __future__ import annotations

import math

import pytest

from cabaret_sim.catalog import RelationOracle, top_popular
from cabaret_sim.demand import position_probs
from cabaret_sim.errors import InstanceTooLargeError, ParameterError
from cabaret_sim.explore import BfsParams
from cabaret_sim.placement import (
    ObjectiveSpec,
    check_submodularity,
    exact_placement,
    greedy_placement,
    objective,
    top_placement,
)

from conftest import random_catalog


def spec_of(table: dict, list_size: int, probs=None, weights=None) -> ObjectiveSpec:
    support = tuple(sorted(table))
    if probs is None:
        probs = (1.0 / list_size,) * list_size
    if weights is None:
        weights = [1.0] * len(support)
    return ObjectiveSpec(support, weights, list_size, probs, table)


def random_spec(rng, size=10, degree=4, support_size=5, list_size=3) -> ObjectiveSpec:
    cat = random_catalog(rng, size, degree)
    oracle = RelationOracle(cat)
    ids = cat.ids()
    support = [ids[i] for i in rng.choice(size, size=support_size, replace=False)]
    weights = {v: float(rng.random()) + 0.05 for v in support}
    dist = position_probs("zipf", float(rng.random() * 1.5), list_size)
    return ObjectiveSpec.build(
        support, list_size, dist, BfsParams(2, 3), oracle, weights
    )


def naive_greedy(spec, capacity, candidates=None):
    """Reference greedy: full objective re-evaluation for every candidate."""
    pool = sorted(candidates if candidates is not None else spec.universe)
    chosen = []
    while len(chosen) < capacity and pool:
        base = objective(spec, chosen)
        best_id, best_gain = None, None
        for cid in pool:
            gain = objective(spec, chosen + [cid]) - base
            if best_gain is None or gain > best_gain:
                best_id, best_gain = cid, gain
        if best_gain <= 0.0:
            fill = pool[: capacity - len(chosen)]
            chosen.extend(fill)
            break
        chosen.append(best_id)
        pool.remove(best_id)
    return chosen


class TestObjective:
    def test_empty_cache_zero(self):
        spec = spec_of({"v": frozenset("abc")}, 2)
        assert objective(spec, set()) == 0.0

    def test_saturation_hits_one(self):
        spec = spec_of({"v": frozenset("abc"), "w": frozenset("cd")}, 2)
        assert objective(spec, set("abcd")) == pytest.approx(1.0, abs=1e-12)

    def test_partial_coverage_uniform(self):
        # Single demand row, uniform over 20 slots, 5 cached: 5/20.
        spec = spec_of({"v": frozenset(f"x{i}" for i in range(30))}, 20)
        cached = {f"x{i}" for i in range(5)}
        assert objective(spec, cached) == pytest.approx(0.25, abs=1e-12)

    def test_cap_at_list_size(self):
        spec = spec_of({"v": frozenset(f"x{i}" for i in range(30))}, 4)
        assert objective(spec, {f"x{i}" for i in range(10)}) == pytest.approx(1.0)

    def test_monotone(self, rng):
        for _ in range(30):
            spec = random_spec(rng)
            universe = list(spec.universe)
            b_idx = rng.choice(len(universe), size=min(6, len(universe)), replace=False)
            b_set = [universe[i] for i in b_idx]
            a_set = b_set[: int(rng.integers(0, len(b_set) + 1))]
            assert objective(spec, a_set) <= objective(spec, b_set) + 1e-12

    def test_weights_normalized(self):
        spec = spec_of({"v": frozenset("ab"), "w": frozenset("cd")}, 2, weights=[3.0, 1.0])
        assert objective(spec, {"a", "b"}) == pytest.approx(0.75)

    def test_duplicate_ids_counted_once(self):
        spec = spec_of({"v": frozenset("abc")}, 3)
        assert objective(spec, ["a", "a", "b"]) == objective(spec, ["a", "b"])


class TestGreedy:
    def test_single_slot_is_argmax(self, rng):
        for _ in range(20):
            spec = random_spec(rng)
            result = greedy_placement(spec, 1)
            values = {c: objective(spec, [c]) for c in spec.universe}
            top_value = max(values.values())
            ties = sorted(c for c, v in values.items() if v == top_value)
            assert result.chosen == (ties[0],)

    def test_matches_naive_on_random_instances(self, rng):
        for _ in range(100):
            spec = random_spec(
                rng,
                size=int(rng.integers(6, 14)),
                degree=int(rng.integers(2, 5)),
                support_size=int(rng.integers(2, 6)),
            )
            capacity = int(rng.integers(1, 6))
            lazy = greedy_placement(spec, capacity)
            assert list(lazy.chosen) == naive_greedy(spec, capacity)

    def test_trajectory_non_decreasing_gains_non_increasing(self, rng):
        for _ in range(20):
            spec = random_spec(rng, size=12, support_size=5)
            result = greedy_placement(spec, 6)
            values = result.objective_values
            assert all(values[i] <= values[i + 1] + 1e-15 for i in range(len(values) - 1))
            real_gains = [g for g in result.gains if g > 0]
            assert all(
                real_gains[i] + 1e-12 >= real_gains[i + 1]
                for i in range(len(real_gains) - 1)
            )
            # Trajectory points equal the objective of each prefix.
            for i in range(len(result.chosen)):
                assert values[i] == pytest.approx(
                    objective(spec, result.chosen[: i + 1]), abs=1e-15
                )

    def test_tie_breaks_toward_smaller_id(self):
        spec = spec_of({"v": frozenset(["b", "d"]), "w": frozenset(["a", "c"])}, 2)
        result = greedy_placement(spec, 2)
        assert result.chosen == ("a", "b")

    def test_zero_gain_fill_by_id_order(self):
        spec = spec_of({"v": frozenset(["a", "b"])}, 1)
        result = greedy_placement(spec, 3, candidates=["z", "b", "a", "y"])
        assert result.chosen[0] == "a"
        assert set(result.chosen[1:]) == {"b", "y"}
        assert result.chosen[1:] == ("b", "y")
        assert result.filled == 2
        assert result.gains[1:] == (0.0, 0.0)

    def test_capacity_validation(self, rng):
        with pytest.raises(ParameterError):
            greedy_placement(random_spec(rng), 0)

    def test_beats_top_given_superset_candidates(self, rng):
        for _ in range(15):
            cat = random_catalog(rng, 15, 4)
            oracle = RelationOracle(cat)
            front = top_popular(cat, 6)
            dist = position_probs("uniform", n=3)
            spec = ObjectiveSpec.build(front.ids, 3, dist, BfsParams(2, 3), oracle)
            capacity = 4
            candidates = set(spec.universe) | set(front.ids)
            greedy = greedy_placement(spec, capacity, candidates)
            top = top_placement(cat, capacity, spec)
            assert objective(spec, greedy.chosen) >= objective(spec, top.chosen) - 1e-12


class TestExact:
    def test_hand_computed_optimum(self):
        # Enumerated by hand: with rows {a,b,c} and {c,d}, two slots and
        # p = (1/2, 1/2), the optima are {a,c}, {b,c}, {c,d} at 0.75; the
        # lexicographically smallest is {a, c}.
        spec = spec_of({"v1": frozenset("abc"), "v2": frozenset("cd")}, 2)
        result = exact_placement(spec, 2)
        assert result.chosen == ("a", "c")
        assert result.objective_values[-1] == pytest.approx(0.75)

    def test_greedy_matches_hand_fixture(self):
        # First pick is c (covers both rows), then the a/b/d tie resolves
        # to a; trajectory 0.5 -> 0.75.
        spec = spec_of({"v1": frozenset("abc"), "v2": frozenset("cd")}, 2)
        result = greedy_placement(spec, 2)
        assert result.chosen == ("c", "a")
        assert result.objective_values == pytest.approx((0.5, 0.75))

    def test_capacity_covers_everything(self, rng):
        spec = random_spec(rng, size=8)
        result = exact_placement(spec, len(spec.universe) + 5)
        assert result.chosen == spec.universe

    def test_never_below_greedy(self, rng):
        for _ in range(30):
            spec = random_spec(rng, size=int(rng.integers(6, 12)))
            capacity = int(rng.integers(1, 4))
            exact = exact_placement(spec, capacity)
            greedy = greedy_placement(spec, capacity)
            assert (
                objective(spec, exact.chosen)
                >= objective(spec, greedy.chosen) - 1e-12
            )

    def test_guard_rejects_large_instances(self):
        table = {"v": frozenset(f"x{i:02d}" for i in range(50))}
        spec = spec_of(table, 5)
        with pytest.raises(InstanceTooLargeError):
            exact_placement(spec, 10)
        assert math.comb(50, 10) > 10_000_000


class TestTopPlacement:
    def test_single_most_popular(self, rng):
        cat = random_catalog(rng, 10, 3)
        result = top_placement(cat, 1)
        assert result.chosen == top_popular(cat, 1).ids

    def test_subset_chain(self, rng):
        cat = random_catalog(rng, 12, 3)
        small = set(top_placement(cat, 3).chosen)
        large = set(top_placement(cat, 7).chosen)
        assert small <= large

    def test_full_front_page(self, rng):
        cat = random_catalog(rng, 60, 3)
        assert top_placement(cat, 50).chosen == top_popular(cat, 50).ids

    def test_trajectory_with_spec(self, rng):
        spec = random_spec(rng)
        cat = random_catalog(rng, 10, 3)
        result = top_placement(cat, 4, spec)
        assert len(result.objective_values) == 4
        values = result.objective_values
        assert all(values[i] <= values[i + 1] + 1e-15 for i in range(3))


class TestSubmodularity:
    def test_random_specs_clean(self, rng):
        for _ in range(5):
            spec = random_spec(rng, size=12, support_size=4)
            report = check_submodularity(spec, trials=2000, seed=int(rng.integers(1 << 30)))
            assert report.ok
            assert report.violations == 0

    def test_equal_sets_equal_gains(self, rng):
        spec = random_spec(rng)
        rows = spec.counts(["x"])  # arbitrary context
        for cid in spec.universe[:5]:
            assert spec.gain(cid, rows) == spec.gain(cid, list(rows))

    def test_modular_instance_context_free_gains(self):
        # Disjoint demand rows make the objective modular: a content's
        # gain never depends on what else is cached.
        spec = spec_of({"v1": frozenset("ab"), "v2": frozenset("cd")}, 2)
        for x in "abcd":
            empty = spec.gain(x, spec.counts([]))
            for context in (["a"], ["c"], ["a", "c"], ["b", "d"]):
                if x in context:
                    continue
                assert spec.gain(x, spec.counts(context)) == pytest.approx(
                    empty, abs=1e-15
                )

    def test_report_fields(self, rng):
        spec = random_spec(rng)
        report = check_submodularity(spec, trials=100, seed=3)
        assert report.trials == 100
        assert report.tolerance == 1e-12
        assert report.max_violation <= report.tolerance


class TestSpecValidation:
    def test_empty_support_rejected(self):
        with pytest.raises(ParameterError):
            ObjectiveSpec((), (), 2, (0.5, 0.5), {})

    def test_misaligned_weights_rejected(self):
        with pytest.raises(ParameterError):
            ObjectiveSpec(("v",), (1.0, 2.0), 2, (0.5, 0.5), {"v": frozenset("a")})
