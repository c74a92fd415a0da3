"""Graph coloring validator (issue-collecting), planted generator, and the
backtracking reference solver."""

import math
import random
from itertools import product

import pytest

from puzzlebench.core import VerdictKind
from puzzlebench.envs import get_environment
from puzzlebench.envs.graphcolor import gc_generate, gc_oracle, gc_validate

C4_EDGES = [(0, 1), (1, 2), (2, 3), (3, 0)]


class TestValidatorExamples:
    def test_alternating_two_coloring_valid(self):
        assert gc_validate(4, C4_EDGES, {0: 1, 1: 2, 2: 1, 3: 2}).is_pass

    def test_both_conflicts_reported(self):
        verdict = gc_validate(4, C4_EDGES, {0: 1, 1: 1, 2: 2, 3: 2})
        assert verdict.kind is VerdictKind.FAIL
        conflicts = [v for v in verdict.violations if v.rule == "conflict"]
        assert len(conflicts) == 2
        assert any("(0,1)" in v.message for v in conflicts)
        assert any("(2,3)" in v.message for v in conflicts)

    def test_missing_vertex(self):
        verdict = gc_validate(4, C4_EDGES, {0: 1, 1: 2, 2: 1})
        assert any(v.rule == "missing_vertex" and v.incomplete for v in verdict.violations)

    def test_unknown_vertex(self):
        verdict = gc_validate(4, C4_EDGES, {0: 1, 1: 2, 2: 1, 3: 2, 9: 1})
        assert any(v.rule == "unknown_vertex" for v in verdict.violations)

    def test_off_palette_color_is_violation_even_without_conflict(self):
        verdict = gc_validate(
            4, C4_EDGES, {0: "Red", 1: "Green", 2: "Red", 3: "Purple"},
            palette=["Red", "Green", "Blue"],
        )
        assert any(v.rule == "off_palette" for v in verdict.violations)

    def test_color_labels_case_insensitive(self):
        assert gc_validate(
            4, C4_EDGES, {0: "red", 1: "GREEN", 2: " Red ", 3: "green"},
            palette=["Red", "Green", "Blue"],
        ).is_pass

    def test_color_count_bounds(self):
        coloring = {0: 1, 1: 2, 2: 3, 3: 2}
        verdict = gc_validate(4, C4_EDGES, coloring, k_max=2)
        assert any(v.rule == "too_many_colors" for v in verdict.violations)
        verdict = gc_validate(4, C4_EDGES, coloring, k_exact=2)
        assert any(v.rule == "wrong_color_count" for v in verdict.violations)

    def test_self_loop_reported(self):
        verdict = gc_validate(2, [(0, 0), (0, 1)], {0: 1, 1: 2})
        assert any(v.rule == "self_loop" for v in verdict.violations)

    def test_pair_list_candidate(self):
        assert gc_validate(2, [(0, 1)], [[0, "Red"], [1, "Green"]]).is_pass

    def test_duplicate_node_conflicting_colors_is_format(self):
        verdict = gc_validate(2, [(0, 1)], [[0, "Red"], [0, "Green"], [1, "Green"]])
        assert verdict.violations[0].rule == "format"

    def test_issue_list_reports_every_monochromatic_edge(self):
        rng = random.Random(4)
        for _ in range(20):
            n = rng.randint(4, 10)
            edges = [
                (u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < 0.4
            ]
            coloring = {v: rng.randint(1, 3) for v in range(n)}
            expected = {(u, v) for u, v in edges if coloring[u] == coloring[v]}
            verdict = gc_validate(n, edges, coloring)
            got = {
                tuple(map(int, v.message.split("(")[1].rstrip(")").split(",")))
                for v in verdict.violations
                if v.rule == "conflict"
            }
            assert got == expected


class TestGenerator:
    def test_determinism(self):
        a, _ = gc_generate(10, 0.3, 3, seed="s")
        b, _ = gc_generate(10, 0.3, 3, seed="s")
        assert a == b

    def test_planted_coloring_passes(self):
        edges, parts = gc_generate(12, 0.35, 3, seed=1)
        coloring = {v: f"c{parts[v]}" for v in range(12)}
        assert gc_validate(12, edges, coloring).is_pass

    def test_edge_count_follows_density(self):
        edges, _ = gc_generate(10, 0.3, 3, seed=0)
        assert len(edges) == round(0.3 * 10 * 9 / 2)

    def test_infeasible_density_rejected(self):
        with pytest.raises(ValueError):
            gc_generate(4, 1.0, 2, seed=0)  # complete graph is not bipartite


class TestOracle:
    def test_triangle_with_two_colors_infeasible(self):
        assert gc_oracle(3, [(0, 1), (1, 2), (0, 2)], ["Red", "Green"]) is None

    def test_cycle_with_two_colors(self):
        coloring = gc_oracle(4, C4_EDGES, ["Red", "Green"])
        assert gc_validate(4, C4_EDGES, coloring, palette=["Red", "Green"]).is_pass

    def test_matches_exhaustive_feasibility_small_graphs(self):
        rng = random.Random(7)
        for _ in range(40):
            n = rng.randint(3, 7)
            k = rng.randint(2, 3)
            edges = [
                (u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < 0.5
            ]
            palette = [f"c{i}" for i in range(k)]
            exhaustive = any(
                all(assignment[u] != assignment[v] for u, v in edges)
                for assignment in product(range(k), repeat=n)
            )
            got = gc_oracle(n, edges, palette)
            assert (got is not None) == exhaustive, (n, k, edges)

    def test_planted_instances_always_colorable(self):
        env = get_environment("graphcolor")
        for level in range(1, 7):
            inst = env.generate(level, 2)
            assert env.validate(inst, env.oracle(inst)).is_pass


class TestRandomColoringRate:
    @staticmethod
    def _is_forest(n, edges):
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for u, v in edges:
            ru, rv = find(u), find(v)
            if ru == rv:
                return False
            parent[ru] = rv
        return True

    def test_pass_frequency_matches_product_formula(self):
        """Empirical Pass rate of uniform random colorings vs (1 - 1/k)^m
        within 3 standard errors, >= 10^4 samples on a fixed instance. The
        instance is a forest, where the product formula is exact."""
        n, k = 12, 3
        edges, _ = gc_generate(n, 0.1, k, seed=0)
        m = len(edges)
        assert m == 7
        assert self._is_forest(n, edges)
        palette = ["Red", "Green", "Blue"]
        rng = random.Random(12345)
        samples = 10_000
        passes = 0
        for _ in range(samples):
            coloring = {v: palette[rng.randrange(k)] for v in range(n)}
            if gc_validate(n, edges, coloring, palette=palette).is_pass:
                passes += 1
        expected = (1 - 1 / k) ** m
        stderr = math.sqrt(expected * (1 - expected) / samples)
        assert abs(passes / samples - expected) < 3 * stderr


class TestMutation:
    def test_recoloring_one_endpoint_always_rejected(self):
        env = get_environment("graphcolor")
        rejected = 0
        for seed in range(25):
            inst = env.generate(2, seed)
            coloring = dict(env.oracle(inst))
            edges = inst.params["edges"]
            if not edges:
                continue
            u, v = edges[seed % len(edges)]
            corrupted = dict(coloring)
            corrupted[u] = coloring[v]  # force a monochromatic edge
            verdict = env.validate(inst, corrupted)
            assert not verdict.is_pass
            assert any(x.rule == "conflict" for x in verdict.violations)
            rejected += 1
        assert rejected == 25
