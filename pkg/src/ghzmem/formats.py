"""Text formats: PBM P1 bitmaps, shape specs and memory-state dumps.

Shape spec::

    # comment
    grid 4 4
    shape 0,0 2,0 1,2
    shape 3,1 3,3 0,3

Memory dump: a header line, then one ``label re im`` line per amplitude::

    grid 4 4 mode entangled shapes 2 counts 3,3
    0000000000000000 0.5 0.0
    ...

``counts`` is omitted when there are no shapes.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import GhzMemError, ParseError
from .memory import MODES, Grid, MemoryHeader, MemoryState, Shape, StoredImage
from .state import SparseState


@dataclass(frozen=True)
class Bitmap:
    """Binary image; ``pixels[y][x]`` is 1 for black."""

    width: int
    height: int
    pixels: tuple[tuple[int, ...], ...]

    def black_pixels(self) -> list[tuple[int, int]]:
        return [
            (x, y) for y in range(self.height) for x in range(self.width) if self.pixels[y][x]
        ]

    @classmethod
    def from_cells(cls, width: int, height: int, cells) -> "Bitmap":
        on = set(cells)
        return cls(
            width,
            height,
            tuple(tuple(int((x, y) in on) for x in range(width)) for y in range(height)),
        )


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0]


def parse_pbm(text: str, source: str | None = None) -> Bitmap:
    """Parse a plain (P1) PBM. Whitespace between pixel digits is optional."""
    tokens: list[tuple[str, int]] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        for tok in _strip_comment(line).split():
            tokens.append((tok, lineno))
    if not tokens:
        raise ParseError("empty file, expected PBM magic 'P1'", line=1, source=source)
    magic, line = tokens[0]
    if magic != "P1":
        raise ParseError(f"bad magic {magic!r}, expected 'P1'", line=line, source=source)
    if len(tokens) < 3:
        raise ParseError("missing width/height", line=tokens[-1][1], source=source)
    dims = []
    for tok, line in tokens[1:3]:
        if not tok.isdigit() or int(tok) < 1:
            raise ParseError(f"bad dimension {tok!r}", line=line, source=source)
        dims.append(int(tok))
    width, height = dims
    bits: list[int] = []
    for tok, line in tokens[3:]:
        for ch in tok:
            if ch not in "01":
                raise ParseError(f"bad pixel value {ch!r}", line=line, source=source)
            bits.append(int(ch))
    if len(bits) != width * height:
        raise ParseError(
            f"expected {width * height} pixels, found {len(bits)}",
            line=tokens[-1][1],
            source=source,
        )
    rows = tuple(tuple(bits[y * width : (y + 1) * width]) for y in range(height))
    return Bitmap(width, height, rows)


def write_pbm(bitmap: Bitmap) -> str:
    lines = ["P1", f"{bitmap.width} {bitmap.height}"]
    lines += [" ".join(str(b) for b in row) for row in bitmap.pixels]
    return "\n".join(lines) + "\n"


def parse_shape_spec(text: str, source: str | None = None) -> tuple[Grid, list[Shape]]:
    grid = None
    shapes: list[Shape] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        parts = _strip_comment(raw).split()
        if not parts:
            continue
        key, args = parts[0], parts[1:]
        if key == "grid":
            if grid is not None:
                raise ParseError("duplicate 'grid' line", line=lineno, source=source)
            if len(args) != 2 or not all(a.isdigit() for a in args):
                raise ParseError("expected 'grid W H'", line=lineno, source=source)
            try:
                grid = Grid(int(args[0]), int(args[1]))
            except GhzMemError as exc:
                raise type(exc)(f"{source or 'spec'}:{lineno}: {exc}") from None
        elif key == "shape":
            if grid is None:
                raise ParseError("'shape' before 'grid'", line=lineno, source=source)
            verts = []
            for a in args:
                xy = a.split(",")
                if len(xy) != 2 or not all(v.strip().lstrip("-").isdigit() for v in xy):
                    raise ParseError(f"bad vertex {a!r}, expected x,y", line=lineno, source=source)
                verts.append((int(xy[0]), int(xy[1])))
            if not verts:
                raise ParseError("shape without vertices", line=lineno, source=source)
            try:
                shape = Shape(tuple(verts))
                shape.indices(grid)
            except GhzMemError as exc:
                raise type(exc)(f"{source or 'spec'}:{lineno}: {exc}") from None
            shapes.append(shape)
        else:
            raise ParseError(f"unknown directive {key!r}", line=lineno, source=source)
    if grid is None:
        raise ParseError("missing 'grid W H' line", source=source)
    return grid, shapes


def write_shape_spec(grid: Grid, shapes) -> str:
    lines = [f"grid {grid.width} {grid.height}"]
    for s in shapes:
        lines.append("shape " + " ".join(f"{x},{y}" for x, y in s.vertices))
    return "\n".join(lines) + "\n"


def dump_memory(m: MemoryState) -> str:
    head = f"grid {m.grid.width} {m.grid.height} mode {m.mode} shapes {m.header.shape_count}"
    if m.header.vertex_counts:
        head += " counts " + ",".join(str(c) for c in m.header.vertex_counts)
    return head + "\n" + m.state.dump()


def parse_memory_dump(text: str, source: str | None = None) -> MemoryState:
    lines = text.splitlines()
    start = 0
    while start < len(lines) and not _strip_comment(lines[start]).strip():
        start += 1
    if start == len(lines):
        raise ParseError("empty state dump", line=1, source=source)
    head = lines[start].split()
    lineno = start + 1
    if (
        len(head) not in (7, 9)
        or head[0] != "grid"
        or head[3] != "mode"
        or head[5] != "shapes"
        or (len(head) == 9 and head[7] != "counts")
    ):
        raise ParseError(
            "expected header 'grid W H mode M shapes K [counts ...]'", line=lineno, source=source
        )
    try:
        grid_w, grid_h, count = int(head[1]), int(head[2]), int(head[6])
        counts = tuple(int(c) for c in head[8].split(",")) if len(head) == 9 else ()
    except ValueError:
        raise ParseError("non-integer field in header", line=lineno, source=source) from None
    grid = Grid(grid_w, grid_h)
    mode = head[4]
    if mode not in MODES:
        raise ParseError(f"unknown mode {mode!r}", line=lineno, source=source)
    if len(counts) != count:
        raise ParseError(f"'shapes {count}' but {len(counts)} counts", line=lineno, source=source)
    body = [""] * (start + 1) + lines[start + 1 :]
    try:
        state = SparseState.parse_dump(body, n_qubits=grid.n_qubits)
    except ParseError as exc:
        raise ParseError(str(exc), source=source) from None
    return MemoryState(state, grid, mode, MemoryHeader(count, counts))


def image_from_bitmap(bitmap: Bitmap, mode: str) -> StoredImage:
    """All black pixels become one shape (no shapes for a blank bitmap)."""
    grid = Grid(bitmap.width, bitmap.height)
    black = bitmap.black_pixels()
    shapes = (Shape(tuple(black)),) if black else ()
    return StoredImage(grid, shapes, mode)
