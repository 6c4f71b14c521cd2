"""Grover search over the grid address space for classically stored vertices.

Only two amplitudes matter: every marked address carries the same amplitude
and so does every unmarked one, so the simulation tracks that pair.
"""

from __future__ import annotations

import math
from collections.abc import Iterable
from dataclasses import dataclass, field


from .errors import ModeError, OracleError
from .memory import CLASSICAL, MemoryState


def _next_pow2(n: int) -> int:
    return max(2, 1 << (n - 1).bit_length())


def address_space(n_cells: int, m: int) -> int:
    return _next_pow2(max(n_cells, 4 * m))


@dataclass(frozen=True)
class OracleSpec:
    address_space_size: int
    marked: frozenset[int]
    n_cells: int

    def __post_init__(self):
        size = self.address_space_size
        if size < 2 or size & (size - 1):
            raise OracleError(f"address space {size} is not a power of two >= 2")
        if not 1 <= self.n_cells <= size:
            raise OracleError(f"{self.n_cells} cells do not fit an address space of {size}")
        object.__setattr__(self, "marked", frozenset(int(a) for a in self.marked))
        stray = sorted(a for a in self.marked if not 0 <= a < self.n_cells)
        if stray:
            raise OracleError(f"marked addresses {stray} are not grid cells")

    @classmethod
    def for_cells(cls, n_cells: int, marked: Iterable[int]) -> "OracleSpec":
        """Pad to a power of two holding the cells; padding is never marked.

        The space is also kept at least four times the marked count: plain
        Grover cannot exceed 1/2 success when half the space is marked.
        """
        marked = frozenset(marked)
        return cls(address_space(n_cells, len(marked)), marked, n_cells)


@dataclass(frozen=True)
class GroverRun:
    iterations: int
    success_probability: float
    sampled_address: int
    hit: bool


def success_probability(n: int, m: int, t: int) -> float:
    """Closed form ``sin^2((2t + 1) arcsin sqrt(m / n))``."""
    return math.sin((2 * t + 1) * math.asin(math.sqrt(m / n))) ** 2


def amplitudes_after(n: int, m: int, t: int) -> tuple[float, float]:
    """Per-address (marked, unmarked) amplitudes after ``t`` Grover iterations."""
    a = b = 1.0 / math.sqrt(n)
    for _ in range(t):
        a = -a  # phase flip on marked addresses
        mean = (m * a + (n - m) * b) / n
        a, b = 2 * mean - a, 2 * mean - b
    return a, b


def _recursion_probability(n: int, m: int, t: int) -> float:
    return m * amplitudes_after(n, m, t)[0] ** 2


def grover_iterations(n: int, m: int) -> int:
    """Iteration count near ``(pi/4) sqrt(n/m)``: floor or ceiling, whichever succeeds more often."""
    if m < 1:
        raise OracleError("no marked addresses")
    if m > n:
        raise OracleError(f"{m} marked addresses in a space of {n}")
    x = math.pi / 4 * math.sqrt(n / m)
    candidates = sorted({max(1, math.floor(x)), max(1, math.ceil(x))})
    return max(candidates, key=lambda t: (_recursion_probability(n, m, t), -t))


def grover_search(oracle: OracleSpec, rng) -> GroverRun:
    """Run the optimal number of iterations and sample one address from the result."""
    n, m = oracle.address_space_size, len(oracle.marked)
    if m == 0:
        raise OracleError("no marked addresses")
    t = grover_iterations(n, m)
    a, b = amplitudes_after(n, m, t)
    p = min(1.0, m * a * a)
    marked = sorted(oracle.marked)
    if rng.random() < p:
        address = marked[int(rng.integers(m))]
    else:
        # k-th unmarked address in increasing order
        k = int(rng.integers(n - m))
        for addr in marked:
            if addr <= k:
                k += 1
            else:
                break
        address = k
    return GroverRun(t, p, address, address in oracle.marked)


@dataclass
class VertexSearch:
    found: frozenset[int]
    runs: list[GroverRun] = field(default_factory=list)
    complete: bool = True
    oracle_queries: int = 0
    expected_queries: float = 0.0
    address_space_size: int = 0


def expected_queries(n_cells: int, m: int) -> float:
    """Mean oracle calls (iterations plus one check per run) to find all ``m`` addresses."""
    total = 0.0
    for r in range(m, 0, -1):
        size = address_space(n_cells, r)
        t = grover_iterations(size, r)
        total += (t + 1) / success_probability(size, r, t)
    return total


def locate_marked(n_cells: int, marked: Iterable[int], rng, max_repeats: int = 100) -> VertexSearch:
    """Repeat Grover runs, checking each sample, until every marked cell is found.

    The oracle of each run marks only the cells not found yet. Running out of
    ``max_repeats`` gives ``complete=False`` rather than an exception.
    """
    stored = frozenset(marked)
    remaining = set(stored)
    search = VertexSearch(
        frozenset(),
        expected_queries=expected_queries(n_cells, len(stored)) if stored else 0.0,
        address_space_size=address_space(n_cells, len(stored)),
    )
    found: set[int] = set()
    while remaining and len(search.runs) < max_repeats:
        run = grover_search(OracleSpec.for_cells(n_cells, remaining), rng)
        search.runs.append(run)
        search.oracle_queries += run.iterations + 1
        if run.sampled_address in remaining:
            remaining.discard(run.sampled_address)
            found.add(run.sampled_address)
    search.found = frozenset(found)
    search.complete = not remaining
    return search


def marked_cells(memory: MemoryState) -> list[int]:
    if memory.mode != CLASSICAL or len(memory.state) != 1:
        raise ModeError(
            "Grover vertex search needs a classically stored image; "
            "entangled memories are read out with the entanglement witness"
        )
    (label, _), = memory.state
    n = memory.grid.n_qubits
    return [q for q in range(n) if label >> (n - 1 - q) & 1]


def locate_vertices_classical(memory: MemoryState, rng, max_repeats: int = 100) -> VertexSearch:
    return locate_marked(memory.grid.n_qubits, marked_cells(memory), rng, max_repeats)
