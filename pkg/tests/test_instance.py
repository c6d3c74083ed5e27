import json
import random

import pytest

from misr.geom_core import Rect, rects_intersect
from misr.instance import (
    DEFAULT_ORACLE_CAP,
    Instance,
    InstanceError,
    OracleCapError,
    Solution,
    exact_mis,
    generate,
    instance_from_json,
    instance_to_json,
    intersection_matrix,
    preprocess,
    solution_from_json,
    solution_to_json,
)
from oracles import brute_force_mis


def random_instance(rng: random.Random, n: int, span: int | None = None) -> Instance:
    span = span or 2 * n
    rects = []
    for _ in range(n):
        x1, x2 = sorted(rng.sample(range(span + 1), 2))
        y1, y2 = sorted(rng.sample(range(span + 1), 2))
        rects.append(Rect(x1, y1, x2, y2))
    return preprocess(rects)


class TestPreprocess:
    def test_single_rect_compresses_to_unit(self):
        inst = preprocess([Rect(5, 7, 100, 900)])
        assert inst.rects == (Rect(0, 0, 1, 1),)
        assert inst.side == 1

    def test_idempotent(self):
        rng = random.Random(0)
        for _ in range(20):
            inst = random_instance(rng, rng.randrange(1, 8))
            again = preprocess(list(inst.rects))
            assert again.rects == inst.rects

    def test_intersection_graph_preserved(self):
        rng = random.Random(1)
        for _ in range(30):
            n = rng.randrange(2, 9)
            span = rng.randrange(4, 40)
            raw = []
            for _ in range(n):
                x1, x2 = sorted(rng.sample(range(span + 1), 2))
                y1, y2 = sorted(rng.sample(range(span + 1), 2))
                raw.append(Rect(x1, y1, x2, y2))
            before = intersection_matrix(tuple(raw))
            after = intersection_matrix(preprocess(raw).rects)
            assert before == after

    def test_coordinates_in_range(self):
        rng = random.Random(2)
        for _ in range(20):
            inst = random_instance(rng, rng.randrange(1, 10), span=1000)
            for r in inst.rects:
                assert 0 <= r.xl < r.xr <= inst.side
                assert 0 <= r.yb < r.yt <= inst.side


class TestExactMis:
    def test_disjoint_takes_all(self):
        inst = generate("stacked_strips", 7, 0)
        assert exact_mis(inst).size == 7

    def test_three_rect_chain(self):
        # 1 meets 2, 2 meets 3, 1 and 3 disjoint: optimum is {0, 2}
        inst = preprocess(
            [Rect(0, 0, 4, 2), Rect(3, 0, 7, 2), Rect(6, 0, 10, 2)]
        )
        sol = exact_mis(inst)
        assert sol.chosen == (0, 2)

    def test_all_pairwise_overlapping(self):
        inst = preprocess([Rect(0, 0, 10, 10), Rect(1, 1, 9, 9), Rect(2, 2, 8, 8)])
        assert exact_mis(inst).size == 1

    def test_matches_brute_force_and_lex_order(self):
        rng = random.Random(3)
        for _ in range(40):
            inst = random_instance(rng, rng.randrange(1, 9))
            sol = exact_mis(inst)
            size, lex = brute_force_mis(inst)
            assert sol.size == size
            assert sol.chosen == lex

    def test_no_larger_independent_set(self):
        rng = random.Random(4)
        from itertools import combinations

        for _ in range(10):
            inst = random_instance(rng, 7)
            sol = exact_mis(inst)
            for combo in combinations(range(inst.n), sol.size + 1):
                assert any(
                    rects_intersect(inst.rects[a], inst.rects[b])
                    for a, b in combinations(combo, 2)
                )

    def test_cap(self):
        inst = generate("uniform_random", DEFAULT_ORACLE_CAP + 1, 0)
        with pytest.raises(OracleCapError):
            exact_mis(inst)
        assert exact_mis(inst, cap=inst.n).size >= 1


class TestGenerators:
    def test_windmill_optimum_is_four(self):
        inst = generate("windmill", 5, 0)
        assert inst.n == 5
        size, _ = brute_force_mis(inst)
        assert size == 4
        assert exact_mis(inst).size == 4

    def test_windmill_not_guillotine_separable(self):
        # every axis-parallel chord of S cuts some rect of the optimum
        inst = generate("windmill", 5, 0)
        opt = exact_mis(inst).chosen
        from misr.geom_core import Point, Segment, segment_intersects_rect

        span = max(r.xr for r in inst.rects)
        for x in range(1, span):
            seg = Segment(Point(x, 0), Point(x, inst.side))
            assert any(segment_intersects_rect(seg, inst.rects[i]) for i in opt)
        for y in range(1, max(r.yt for r in inst.rects)):
            seg = Segment(Point(0, y), Point(inst.side, y))
            assert any(segment_intersects_rect(seg, inst.rects[i]) for i in opt)

    def test_determinism(self):
        for kind in ("uniform_random", "nested_grid", "windmill", "stacked_strips"):
            a = generate(kind, 6, 42)
            b = generate(kind, 6, 42)
            assert a == b

    def test_stacked_strips_all_disjoint(self):
        inst = generate("stacked_strips", 9, 5)
        assert exact_mis(inst, cap=9).size == 9

    def test_unknown_kind(self):
        with pytest.raises(InstanceError):
            generate("mystery", 3, 0)

    def test_emits_preprocessed(self):
        for kind in ("uniform_random", "nested_grid", "windmill", "stacked_strips"):
            inst = generate(kind, 7, 1)
            assert preprocess(list(inst.rects)).rects == inst.rects


class TestJson:
    def test_round_trip(self):
        rng = random.Random(7)
        for _ in range(20):
            inst = random_instance(rng, rng.randrange(1, 9))
            assert instance_from_json(instance_to_json(inst)) == inst

    def test_missing_rects(self):
        with pytest.raises(InstanceError):
            instance_from_json({"n": 2})

    def test_non_integer_fields(self):
        with pytest.raises(InstanceError):
            instance_from_json({"rects": [{"xl": 0.5, "yb": 0, "xr": 1, "yt": 1}]})

    def test_overflow(self):
        with pytest.raises(InstanceError):
            instance_from_json(
                {"rects": [{"xl": 0, "yb": 0, "xr": 2**63, "yt": 1}]}
            )

    def test_solution_round_trip(self):
        sol = Solution((0, 2, 5))
        assert solution_from_json(solution_to_json(sol)) == sol

    def test_solution_overlap_rejected(self):
        inst = preprocess([Rect(0, 0, 4, 4), Rect(1, 1, 5, 5)])
        with pytest.raises(InstanceError):
            solution_from_json({"chosen": [0, 1], "size": 2}, inst)

    def test_solution_size_mismatch(self):
        with pytest.raises(InstanceError):
            solution_from_json({"chosen": [0], "size": 2})
