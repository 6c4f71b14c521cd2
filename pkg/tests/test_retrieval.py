import itertools
import math
from collections import Counter

import numpy as np
import pytest

from ghzmem import retrieval
from ghzmem.entanglement import SvetlichnyResult, SvetlichnySettings
from ghzmem.errors import CapacityError, ConsistencyError, SizeError
from ghzmem.measurement import PreparationOracle
from ghzmem.memory import CLASSICAL, ENTANGLED, Grid, Shape, StoredImage
from ghzmem.retrieval import (
    SHOTS,
    MemoryPreparer,
    RetrievalConfig,
    compare_memories,
    enumerate_candidates,
    find_shapes,
    recognize_scale_invariant,
    render_report,
    summarize_report,
    worst_case_arrays,
)

TRI_A = Shape(((0, 0), (2, 0), (1, 2)))
TRI_B = Shape(((3, 1), (3, 3), (0, 3)))


def retrieve(grid, shapes, storage=ENTANGLED, **kw):
    image = StoredImage(grid, tuple(shapes), storage)
    oracle = PreparationOracle(MemoryPreparer(image))
    return find_shapes(oracle, grid, RetrievalConfig(**kw)), oracle


def stored_sets(grid, shapes):
    return {tuple(sorted(s.indices(grid))) for s in shapes}


def random_image(rng, max_side=4, counts=(3, 4), max_shapes=3):
    while True:
        w, h = (int(v) for v in rng.integers(2, max_side + 1, 2))
        k = int(rng.integers(1, max_shapes + 1))
        sizes = [int(rng.choice(counts)) for _ in range(k)]
        if sum(sizes) <= w * h:
            break
    grid = Grid(w, h)
    cells = [grid.coords(int(q)) for q in rng.permutation(grid.n_qubits)]
    shapes, pos = [], 0
    for s in sizes:
        shapes.append(Shape(tuple(cells[pos : pos + s])))
        pos += s
    return grid, shapes


class TestCombinatorics:
    def test_enumerate_counts(self):
        assert len(list(enumerate_candidates(4, 3))) == 4
        subsets = list(enumerate_candidates(9, 3))
        assert len(subsets) == 84 == math.comb(9, 3)
        assert subsets[0] == (0, 1, 2)
        assert subsets == sorted(set(subsets))

    @pytest.mark.parametrize("n,k", [(3, 0), (3, 4)])
    def test_enumerate_range(self, n, k):
        with pytest.raises(SizeError):
            enumerate_candidates(n, k)

    def test_worst_case_examples(self):
        assert worst_case_arrays(16, [3, 3]) == 560 * 286 == 160160
        assert worst_case_arrays(3, [3]) == 1
        assert worst_case_arrays(9, [3]) == 84

    def test_worst_case_brute_force(self):
        # count ordered selections of disjoint subsets directly
        for n, counts in [(6, [2, 2]), (7, [3, 2]), (6, [2, 3, 1])]:
            total = 0
            for first in itertools.combinations(range(n), counts[0]):
                rest = [q for q in range(n) if q not in first]
                if len(counts) == 1:
                    total += 1
                    continue
                for second in itertools.combinations(rest, counts[1]):
                    left = [q for q in rest if q not in second]
                    total += math.comb(len(left), counts[2]) if len(counts) == 3 else 1
            assert worst_case_arrays(n, counts) == total

    def test_capacity(self):
        with pytest.raises(CapacityError):
            worst_case_arrays(5, [3, 3])


class TestConfig:
    def test_shot_floor(self):
        with pytest.raises(ValueError):
            RetrievalConfig(mode=SHOTS, shots=99)

    def test_probe_order(self):
        assert RetrievalConfig(vertex_counts=(3, 4, 3)).probe_order(16) == [4, 3]
        assert RetrievalConfig().probe_order(16) == [5, 4, 3, 2]
        assert RetrievalConfig().probe_order(3) == [3, 2]

    def test_count_range(self):
        with pytest.raises(SizeError):
            RetrievalConfig(vertex_counts=(7,))


class TestExactRetrieval:
    def test_two_triangles(self):
        grid = Grid(4, 4)
        report, oracle = retrieve(grid, [TRI_A, TRI_B], vertex_counts=(3, 3))
        assert set(report.found_shapes) == stored_sets(grid, [TRI_A, TRI_B])
        assert report.total_preparations == 0
        assert oracle.consumed == 0
        assert report.worst_case_bound == 160160
        assert all(t.preparations == 0 for t in report.tests)

    def test_two_triangles_without_header(self):
        grid = Grid(4, 4)
        report, _ = retrieve(grid, [TRI_A, TRI_B])
        assert set(report.found_shapes) == stored_sets(grid, [TRI_A, TRI_B])
        assert report.worst_case_bound == 160160
        assert report.candidate_subsets == sum(math.comb(16, k) for k in (5, 4, 3, 2))

    def test_mixed_subset_not_violated(self):
        grid = Grid(3, 3)
        report, _ = retrieve(grid, [TRI_A], vertex_counts=(3,), skip_found=False)
        by_subset = {t.subset: t.result for t in report.tests}
        assert not by_subset[(0, 1, 2)].violated  # two vertices + background
        assert by_subset[(0, 2, 7)].violated
        assert sum(r.violated for r in by_subset.values()) == 1

    def test_empty_image(self):
        grid = Grid(3, 3)
        report, _ = retrieve(grid, [], vertex_counts=(3,))
        assert report.found_shapes == []
        assert len(report.tests) == 84

    def test_classical_memory_has_no_shapes(self):
        grid = Grid(3, 3)
        report, _ = retrieve(grid, [TRI_A], storage=CLASSICAL)
        assert report.found_shapes == []

    def test_skip_found_reduces_tests(self):
        grid = Grid(4, 4)
        skipped, _ = retrieve(grid, [TRI_A, TRI_B], vertex_counts=(3, 3))
        full, _ = retrieve(grid, [TRI_A, TRI_B], vertex_counts=(3, 3), skip_found=False)
        assert len(full.tests) == 560
        assert len(skipped.tests) < len(full.tests)
        assert set(full.found_shapes) == set(skipped.found_shapes)

    def test_mixed_sizes(self):
        grid = Grid(4, 3)
        shapes = [Shape(((0, 0), (3, 0))), Shape(((1, 1), (2, 1), (1, 2), (3, 2))), Shape(((0, 2), (0, 1), (2, 0)))]
        report, _ = retrieve(grid, shapes, restarts=8)
        assert set(report.found_shapes) == stored_sets(grid, shapes)
        assert recognize_scale_invariant(report) == Counter({2: 1, 3: 1, 4: 1})

    def test_randomized_soundness_and_completeness(self):
        rng = np.random.default_rng(11)
        for _ in range(40):
            grid, shapes = random_image(rng, max_side=3, counts=(2, 3, 4))
            counts = tuple(len(s) for s in shapes)
            report, _ = retrieve(grid, shapes, vertex_counts=counts, restarts=8)
            assert set(report.found_shapes) == stored_sets(grid, shapes)

    def test_parallel_matches_sequential(self):
        grid = Grid(4, 4)
        seq, _ = retrieve(grid, [TRI_A, TRI_B], vertex_counts=(3, 3))
        par, _ = retrieve(grid, [TRI_A, TRI_B], vertex_counts=(3, 3), workers=2)
        assert par.found_shapes == seq.found_shapes
        assert render_report(par) == render_report(seq)

    def test_surplus_is_inconsistent(self):
        grid = Grid(4, 4)
        with pytest.raises(ConsistencyError):
            retrieve(grid, [TRI_A, TRI_B], vertex_counts=(3,))

    def test_overlapping_violations_are_inconsistent(self, monkeypatch):
        fake = SvetlichnyResult(9.0, 3, True, SvetlichnySettings((0.0,) * 3, (0.0,) * 3))

        def always_violated(tensor, *args, **kwargs):
            return fake

        monkeypatch.setattr(retrieval, "max_svetlichny_tensor", always_violated)
        with pytest.raises(ConsistencyError, match="overlaps"):
            retrieve(Grid(3, 3), [TRI_A], vertex_counts=(3,), skip_found=False)

    def test_deterministic(self):
        grid = Grid(4, 4)
        a, _ = retrieve(grid, [TRI_A, TRI_B], vertex_counts=(3, 3), seed=5)
        b, _ = retrieve(grid, [TRI_A, TRI_B], vertex_counts=(3, 3), seed=5)
        assert render_report(a) == render_report(b)


class TestShotRetrieval:
    def test_accounting(self):
        grid = Grid(3, 3)
        report, oracle = retrieve(grid, [TRI_A], vertex_counts=(3,), mode=SHOTS, shots=1024, seed=1)
        assert all(t.preparations == 8 * 1024 for t in report.tests)
        assert report.total_preparations == oracle.consumed == len(report.tests) * 8 * 1024
        assert report.total_preparations <= report.worst_case_bound * 8 * 1024
        assert report.found_shapes == [(0, 2, 7)]

    def test_single_triangle_accuracy(self):
        rng = np.random.default_rng(5)
        grid = Grid(3, 3)
        hits = 0
        trials = 100
        for trial in range(trials):
            cells = [grid.coords(int(q)) for q in rng.permutation(9)[:3]]
            shape = Shape(tuple(cells))
            report, _ = retrieve(grid, [shape], vertex_counts=(3,), mode=SHOTS, shots=4096, seed=trial)
            hits += set(report.found_shapes) == stored_sets(grid, [shape])
        assert hits >= 99


class TestRecognition:
    def squares(self):
        small = Shape(((1, 1), (2, 1), (2, 2), (1, 2)))
        large = Shape(((0, 0), (4, 0), (4, 4), (0, 4)))
        a, _ = retrieve(Grid(5, 5), [small], vertex_counts=(4,))
        b, _ = retrieve(Grid(5, 5), [large], vertex_counts=(4,))
        return a, b

    def test_scale_invariant(self):
        a, b = self.squares()
        assert recognize_scale_invariant(a) == recognize_scale_invariant(b) == Counter({4: 1})
        sim = compare_memories(a, b)
        assert sim.same_shape_counts and sim.shared_counts == Counter({4: 1})
        assert not sim.identical and sim.identical_shapes == ()

    def test_two_triangles_counts(self):
        report, _ = retrieve(Grid(4, 4), [TRI_A, TRI_B], vertex_counts=(3, 3))
        assert recognize_scale_invariant(report) == Counter({3: 2})

    def test_empty_counts(self):
        report, _ = retrieve(Grid(3, 3), [], vertex_counts=(3,))
        assert recognize_scale_invariant(report) == Counter()

    def test_multiset_intersection(self):
        grid = Grid(4, 4)
        quad = Shape(((3, 1), (3, 3), (0, 3), (1, 3)))
        a, _ = retrieve(grid, [TRI_A, TRI_B], vertex_counts=(3, 3))
        b, _ = retrieve(grid, [TRI_A, quad], vertex_counts=(4, 3))
        sim = compare_memories(a, b)
        assert sim.shared_counts == Counter({3: 1})
        assert not sim.same_shape_counts
        assert sim.identical_shapes == (tuple(sorted(TRI_A.indices(grid))),)

    def test_identical_images(self):
        a, _ = retrieve(Grid(4, 4), [TRI_A, TRI_B], vertex_counts=(3, 3))
        sim = compare_memories(a, a)
        assert sim.identical and sim.same_shape_counts

    def test_moved_triangle(self):
        moved = Shape(((1, 0), (3, 0), (2, 2)))
        a, _ = retrieve(Grid(4, 4), [TRI_A], vertex_counts=(3,))
        b, _ = retrieve(Grid(4, 4), [moved], vertex_counts=(3,))
        sim = compare_memories(a, b)
        assert sim.same_shape_counts and not sim.identical


class TestReport:
    def test_render_layout(self):
        report, _ = retrieve(Grid(3, 3), [TRI_A], vertex_counts=(3,))
        lines = render_report(report).splitlines()
        assert lines[:9] == [
            "ghzmem-report 1",
            "grid 3 3",
            "mode exact",
            "seed 0",
            "shots 0",
            "margin 0.02",
            "restarts 32",
            "probe 3",
            "found 1",
        ]
        assert lines[9] == "shape 0,0 2,0 1,2"
        assert lines[10] == f"tests {len(report.tests)}"
        assert lines[-3:] == ["preparations 0", "bound 84", "candidates 84"]
        hit = next(line for line in lines if line.startswith("test 0,2,7 "))
        assert hit.endswith("violated 1 preparations 0")

    def test_summary_mentions_shapes(self):
        report, _ = retrieve(Grid(3, 3), [TRI_A], vertex_counts=(3,))
        text = summarize_report(report)
        assert "(0,0) (2,0) (1,2)" in text
        assert "found 1 shape" in text
