"""Binary images on a qubit grid and the memory states that store them.

Qubit ``y * width + x`` holds grid cell ``(x, y)``. In classical mode every
vertex qubit is set to ``|1>``. In entangled mode each shape's vertex qubits
share one GHZ state and all other qubits stay ``|0>``, so ``k`` shapes give a
uniform superposition over the ``2^k`` unions of shape vertex sets.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import CoordinateError, DimensionError, ModeError, OverlapError, SizeError
from .state import MAX_QUBITS, SparseState, inner

CLASSICAL = "classical"
ENTANGLED = "entangled"
MODES = (CLASSICAL, ENTANGLED)


@dataclass(frozen=True)
class Grid:
    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise SizeError(f"grid dimensions must be positive, got {self.width}x{self.height}")
        if self.width * self.height > MAX_QUBITS:
            raise SizeError(
                f"{self.width}x{self.height} grid needs {self.width * self.height} qubits "
                f"(limit {MAX_QUBITS})"
            )

    @property
    def n_qubits(self) -> int:
        return self.width * self.height

    def contains(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height

    def coords(self, index: int) -> tuple[int, int]:
        if not 0 <= index < self.n_qubits:
            raise CoordinateError(f"qubit {index} outside {self.width}x{self.height} grid")
        return index % self.width, index // self.width


def qubit_index(grid: Grid, x: int, y: int) -> int:
    if not grid.contains(x, y):
        raise CoordinateError(f"({x}, {y}) outside {grid.width}x{grid.height} grid")
    return y * grid.width + x


@dataclass(frozen=True)
class Shape:
    """Polygon given by its vertex cells; only membership matters, not order."""

    vertices: tuple[tuple[int, int], ...]

    def __post_init__(self):
        verts = tuple((int(x), int(y)) for x, y in self.vertices)
        if not verts:
            raise SizeError("a shape needs at least one vertex")
        if len(set(verts)) != len(verts):
            raise OverlapError(f"repeated vertex in {verts}")
        object.__setattr__(self, "vertices", verts)

    def __len__(self) -> int:
        return len(self.vertices)

    def indices(self, grid: Grid) -> frozenset[int]:
        return frozenset(qubit_index(grid, x, y) for x, y in self.vertices)


@dataclass(frozen=True)
class StoredImage:
    grid: Grid
    shapes: tuple[Shape, ...] = ()
    mode: str = ENTANGLED

    def __post_init__(self):
        object.__setattr__(self, "shapes", tuple(self.shapes))
        if self.mode not in MODES:
            raise ModeError(f"mode must be one of {MODES}, got {self.mode!r}")
        seen: dict[int, int] = {}
        for i, shape in enumerate(self.shapes):
            idx = shape.indices(self.grid)
            if self.mode == ENTANGLED:
                if len(shape) < 2:
                    raise SizeError(f"shape {i} has one vertex; GHZ storage needs at least two")
                clash = sorted(q for q in idx if q in seen)
                if clash:
                    cells = [self.grid.coords(q) for q in clash]
                    raise OverlapError(
                        f"shape {i} shares vertices {cells} with shape {seen[clash[0]]}"
                    )
            for q in idx:
                seen.setdefault(q, i)

    def vertex_sets(self) -> list[frozenset[int]]:
        return [s.indices(self.grid) for s in self.shapes]


@dataclass(frozen=True)
class MemoryHeader:
    """Classical side channel: how many shapes and how many vertices each."""

    shape_count: int
    vertex_counts: tuple[int, ...]

    @classmethod
    def for_image(cls, image: StoredImage) -> "MemoryHeader":
        return cls(len(image.shapes), tuple(len(s) for s in image.shapes))


@dataclass(frozen=True)
class MemoryState:
    state: SparseState
    grid: Grid
    mode: str
    header: MemoryHeader
    image: StoredImage | None = field(default=None, compare=False)


def _mask(grid: Grid, indices: Iterable[int]) -> int:
    n = grid.n_qubits
    m = 0
    for q in indices:
        m |= 1 << (n - 1 - q)
    return m


def store_classical(image: StoredImage) -> MemoryState:
    """One basis state with ``|1>`` on every vertex qubit; overlapping shapes merge."""
    if image.mode != CLASSICAL:
        raise ModeError("store_classical needs a classical-mode image")
    label = 0
    for verts in image.vertex_sets():
        label |= _mask(image.grid, verts)
    state = SparseState(image.grid.n_qubits, {label: 1.0})
    return MemoryState(state, image.grid, CLASSICAL, MemoryHeader.for_image(image), image)


def store_entangled(image: StoredImage) -> MemoryState:
    if image.mode != ENTANGLED:
        raise ModeError("store_entangled needs an entangled-mode image")
    masks = [_mask(image.grid, verts) for verts in image.vertex_sets()]
    k = len(masks)
    amp = 2.0 ** (-k / 2)
    amps = {}
    for choice in range(1 << k):
        label = 0
        for j, m in enumerate(masks):
            if choice >> j & 1:
                label |= m
        amps[label] = amp
    # 2^(-k/2) summed 2^k times is 1 only up to rounding
    state = SparseState(image.grid.n_qubits, amps, normalize=True)
    return MemoryState(state, image.grid, ENTANGLED, MemoryHeader.for_image(image), image)


def store(image: StoredImage) -> MemoryState:
    return store_entangled(image) if image.mode == ENTANGLED else store_classical(image)


def initial_memory(grid: Grid) -> MemoryState:
    """Blank memory: every qubit ``|0>``."""
    return store_entangled(StoredImage(grid, (), ENTANGLED))


def overlap(a: MemoryState, b: MemoryState) -> complex:
    if a.grid != b.grid:
        raise DimensionError(f"memories on different grids: {a.grid} vs {b.grid}")
    return inner(a.state, b.state)


def _as_indices(grid: Grid, vertex_set) -> list[int]:
    out = []
    for v in vertex_set:
        if isinstance(v, (tuple, list)):
            out.append(qubit_index(grid, *v))
        else:
            if not 0 <= int(v) < grid.n_qubits:
                raise CoordinateError(f"qubit {v} outside {grid.width}x{grid.height} grid")
            out.append(int(v))
    if len(set(out)) != len(out):
        raise OverlapError(f"repeated vertex in {list(vertex_set)}")
    return out


def ghz_projector_probability(m: MemoryState, vertex_set: Sequence) -> float:
    """``<psi| P |psi>`` for the projector onto GHZ on ``vertex_set`` and ``|0>`` elsewhere.

    ``vertex_set`` holds qubit indices or ``(x, y)`` cells.
    """
    verts = _as_indices(m.grid, vertex_set)
    if len(verts) < 2:
        raise SizeError("GHZ projector needs at least two vertices")
    amps = m.state.indices()
    amp = (amps.get(0, 0j) + amps.get(_mask(m.grid, verts), 0j)) / np.sqrt(2.0)
    return float(abs(amp) ** 2)
