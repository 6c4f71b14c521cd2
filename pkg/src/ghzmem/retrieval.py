"""Shape retrieval by searching qubit subsets for genuine multipartite entanglement.

Each candidate ``N``-subset is tested with the N-party Svetlichny witness; a
violation means the subset is exactly the vertex set of one stored shape.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from collections.abc import Iterator, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .entanglement import (
    DEFAULT_MARGIN,
    DEFAULT_RESTARTS,
    SvetlichnyResult,
    estimate_svetlichny,
    ghz_optimal_settings,
    max_svetlichny_tensor,
)
from .errors import CapacityError, ConsistencyError, SizeError
from .measurement import PreparationOracle, correlation_tensor_sparse
from .memory import Grid, MemoryState, store
from .state import MAX_REDUCED_QUBITS, SparseState

EXACT = "exact"
SHOTS = "shots"
DEFAULT_MAX_PROBE = 5
REPORT_VERSION = 1


@dataclass(frozen=True)
class RetrievalConfig:
    mode: str = EXACT
    shots: int = 4096
    vertex_counts: tuple[int, ...] = ()
    margin: float = DEFAULT_MARGIN
    restarts: int = DEFAULT_RESTARTS
    seed: int = 0
    max_probe: int = DEFAULT_MAX_PROBE
    skip_found: bool = True
    workers: int = 1

    def __post_init__(self):
        if self.mode not in (EXACT, SHOTS):
            raise ValueError(f"mode must be 'exact' or 'shots', got {self.mode!r}")
        if self.mode == SHOTS and self.shots < 100:
            raise ValueError("shot mode needs at least 100 shots per correlator")
        object.__setattr__(self, "vertex_counts", tuple(int(c) for c in self.vertex_counts))
        for c in self.vertex_counts:
            if not 2 <= c <= MAX_REDUCED_QUBITS:
                raise SizeError(f"vertex count {c} outside [2, {MAX_REDUCED_QUBITS}]")

    def probe_order(self, n: int) -> list[int]:
        """Vertex counts to probe, largest first."""
        if self.vertex_counts:
            return sorted(set(self.vertex_counts), reverse=True)
        top = min(self.max_probe, n, MAX_REDUCED_QUBITS)
        return list(range(top, 1, -1))


@dataclass(frozen=True)
class SubsetTest:
    subset: tuple[int, ...]
    result: SvetlichnyResult
    preparations: int


@dataclass
class RetrievalReport:
    grid: Grid
    config: RetrievalConfig
    probed: list[int]
    found_shapes: list[tuple[int, ...]] = field(default_factory=list)
    tests: list[SubsetTest] = field(default_factory=list)
    total_preparations: int = 0
    worst_case_bound: int = 0
    candidate_subsets: int = 0

    def found_coordinates(self) -> list[list[tuple[int, int]]]:
        return [[self.grid.coords(q) for q in shape] for shape in self.found_shapes]


def enumerate_candidates(n: int, k: int) -> Iterator[tuple[int, ...]]:
    """All ``k``-subsets of ``range(n)`` in lexicographic order."""
    if not 0 < k <= n:
        raise SizeError(f"need 0 < k <= n, got n={n}, k={k}")
    return itertools.combinations(range(n), k)


def worst_case_arrays(n: int, vertex_counts: Sequence[int]) -> int:
    """``prod_i C(n - sum_{j<i} N_j, N_i)``: arrays needed to pin down every shape."""
    counts = [int(c) for c in vertex_counts]
    if any(c < 1 for c in counts) or sum(counts) > n:
        raise CapacityError(f"cannot place shapes with {counts} vertices on {n} qubits")
    total, left = 1, n
    for c in counts:
        total *= math.comb(left, c)
        left -= c
    return total


def _rng_for(seed: int, subset: Sequence[int]) -> np.random.Generator:
    # one stream per subset keeps results independent of evaluation order
    return np.random.default_rng([seed, len(subset), *subset])


def _exact_test(state: SparseState, subset, config: RetrievalConfig) -> SubsetTest:
    tensor = correlation_tensor_sparse(state, subset)
    result = max_svetlichny_tensor(
        tensor, config.restarts, _rng_for(config.seed, subset), config.margin
    )
    return SubsetTest(tuple(subset), result, 0)


def _exact_batch(state: SparseState, subsets, config: RetrievalConfig) -> list[SubsetTest]:
    return [_exact_test(state, s, config) for s in subsets]


def _shot_test(oracle: PreparationOracle, subset, config: RetrievalConfig) -> SubsetTest:
    before = oracle.consumed
    result = estimate_svetlichny(
        oracle,
        subset,
        ghz_optimal_settings(len(subset)),
        config.shots,
        _rng_for(config.seed, subset),
        config.margin,
    )
    return SubsetTest(tuple(subset), result, oracle.consumed - before)


def _reference_state(oracle: PreparationOracle) -> SparseState:
    made = oracle.reference()
    return getattr(made, "state", made)


def _evaluate_parallel(state, candidates, config) -> list[SubsetTest]:
    chunk = max(1, math.ceil(len(candidates) / (4 * config.workers)))
    batches = [candidates[i : i + chunk] for i in range(0, len(candidates), chunk)]
    with ProcessPoolExecutor(max_workers=config.workers) as pool:
        futures = [pool.submit(_exact_batch, state, b, config) for b in batches]
        return [t for f in futures for t in f.result()]


def find_shapes(oracle: PreparationOracle, grid: Grid, config: RetrievalConfig) -> RetrievalReport:
    """Search every candidate subset for a Svetlichny violation.

    Probes vertex counts largest first. With ``skip_found`` a subset touching
    an already found shape is not tested. Exact mode reads reduced states off
    the simulator and consumes no preparations; shot mode spends
    ``2^N * shots`` fresh preparations per tested subset.

    Raises ConsistencyError when violating subsets overlap, or when more shapes
    of some size are found than ``config.vertex_counts`` announces.
    """
    n = grid.n_qubits
    probed = config.probe_order(n)
    report = RetrievalReport(grid, config, probed)
    report.candidate_subsets = sum(math.comb(n, k) for k in probed if k <= n)
    if config.vertex_counts:
        report.worst_case_bound = worst_case_arrays(n, config.vertex_counts)
    state = _reference_state(oracle) if config.mode == EXACT else None

    taken: set[int] = set()
    for k in probed:
        if k > n:
            continue
        candidates = [
            s
            for s in enumerate_candidates(n, k)
            if not (config.skip_found and taken.intersection(s))
        ]
        if config.mode == EXACT and config.workers > 1:
            evaluated = iter(_evaluate_parallel(state, candidates, config))
        else:
            evaluated = None
        for subset in candidates:
            if evaluated is not None:
                test = next(evaluated)
            if config.skip_found and taken.intersection(subset):
                continue
            if evaluated is None:
                if config.mode == EXACT:
                    test = _exact_test(state, subset, config)
                else:
                    test = _shot_test(oracle, subset, config)
            report.tests.append(test)
            report.total_preparations += test.preparations
            if test.result.violated:
                clash = taken.intersection(subset)
                if clash:
                    raise ConsistencyError(
                        f"violating subset {subset} overlaps found shape qubits {sorted(clash)}",
                    )
                taken.update(subset)
                report.found_shapes.append(tuple(subset))

    if config.vertex_counts:
        expected = Counter(config.vertex_counts)
        got = Counter(len(s) for s in report.found_shapes)
        surplus = {k: got[k] for k in got if got[k] > expected[k]}
        if surplus:
            raise ConsistencyError(f"found more shapes than announced: {surplus} vs {dict(expected)}")
    else:
        report.worst_case_bound = worst_case_arrays(n, [len(s) for s in report.found_shapes])
    return report


class MemoryPreparer:
    """Picklable factory that rebuilds a memory state, for use with PreparationOracle."""

    def __init__(self, source):
        self.source = source

    def __call__(self):
        if isinstance(self.source, MemoryState):
            return self.source
        return store(self.source)


def recognize_scale_invariant(report: RetrievalReport) -> Counter:
    """Multiset of vertex counts of the found shapes (positions and sizes ignored)."""
    return Counter(len(s) for s in report.found_shapes)


@dataclass(frozen=True)
class Similarity:
    shared_counts: Counter
    same_shape_counts: bool
    identical_shapes: tuple[tuple[int, ...], ...]
    identical: bool


def compare_memories(a: RetrievalReport, b: RetrievalReport) -> Similarity:
    ca, cb = recognize_scale_invariant(a), recognize_scale_invariant(b)
    if a.grid == b.grid:
        same = tuple(sorted(set(a.found_shapes) & set(b.found_shapes)))
        identical = set(a.found_shapes) == set(b.found_shapes)
    else:
        same, identical = (), False
    return Similarity(ca & cb, ca == cb, same, identical)


def _fmt(x: float) -> str:
    return format(x + 0.0, ".12g")


def render_report(report: RetrievalReport, seed: int | None = None) -> str:
    """Machine-readable report; field order is fixed."""
    cfg = report.config
    lines = [
        f"ghzmem-report {REPORT_VERSION}",
        f"grid {report.grid.width} {report.grid.height}",
        f"mode {cfg.mode}",
        f"seed {cfg.seed if seed is None else seed}",
        f"shots {cfg.shots if cfg.mode == SHOTS else 0}",
        f"margin {_fmt(cfg.margin)}",
        f"restarts {cfg.restarts}",
        "probe " + ",".join(str(k) for k in report.probed),
        f"found {len(report.found_shapes)}",
    ]
    for coords in report.found_coordinates():
        lines.append("shape " + " ".join(f"{x},{y}" for x, y in coords))
    lines.append(f"tests {len(report.tests)}")
    for t in report.tests:
        lines.append(
            "test "
            + ",".join(str(q) for q in t.subset)
            + f" value {_fmt(t.result.value)}"
            + f" violated {int(t.result.violated)}"
            + f" preparations {t.preparations}"
        )
    lines.append(f"preparations {report.total_preparations}")
    lines.append(f"bound {report.worst_case_bound}")
    lines.append(f"candidates {report.candidate_subsets}")
    return "\n".join(lines) + "\n"


def summarize_report(report: RetrievalReport) -> str:
    """Short human-readable summary."""
    cfg = report.config
    out = [
        f"grid {report.grid.width}x{report.grid.height} ({report.grid.n_qubits} qubits), "
        f"{cfg.mode} mode, probed N = {', '.join(map(str, report.probed))}",
        f"found {len(report.found_shapes)} shape(s) in {len(report.tests)} subset tests",
    ]
    for coords, shape in zip(report.found_coordinates(), report.found_shapes):
        hit = next(t for t in report.tests if t.subset == shape)
        out.append(
            f"  {len(shape)}-vertex shape at {' '.join(f'({x},{y})' for x, y in coords)}"
            f"  S = {hit.result.value:.6f} > {hit.result.threshold:.4f}"
        )
    out.append(f"preparations consumed: {report.total_preparations}")
    out.append(f"worst-case array bound: {report.worst_case_bound}")
    return "\n".join(out) + "\n"
