"""Command-line front end.

Exit codes: 0 success, 2 parse error, 3 domain error, 4 consistency error.
Machine-readable output goes to ``--out`` when given (a human summary is then
printed), otherwise to stdout.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .entanglement import DEFAULT_MARGIN, DEFAULT_RESTARTS, make_ghz, make_singlet, max_svetlichny
from .errors import GhzMemError, ModeError, ParseError, SizeError
from .formats import (
    Bitmap,
    dump_memory,
    image_from_bitmap,
    parse_memory_dump,
    parse_pbm,
    parse_shape_spec,
    write_pbm,
)
from .grover import locate_marked, marked_cells
from .measurement import PreparationOracle
from .memory import CLASSICAL, ENTANGLED, Grid, MemoryState, StoredImage, initial_memory, overlap, store
from .memory import ghz_projector_probability
from .retrieval import (
    EXACT,
    SHOTS,
    MemoryPreparer,
    RetrievalConfig,
    find_shapes,
    recognize_scale_invariant,
    render_report,
    summarize_report,
)
from .state import SparseState, partial_trace, tensor, to_density

BUILTIN_STATES = ("ghz3", "ghz4", "singlet", "biseparable3")


def _builtin_state(name: str) -> SparseState:
    if name == "ghz3":
        return make_ghz(3)
    if name == "ghz4":
        return make_ghz(4)
    if name == "singlet":
        return make_singlet()
    # Bell pair on qubits 0,1 with qubit 2 in |+>
    plus = SparseState(1, {0: 1.0, 1: 1.0}, normalize=True)
    return tensor(make_ghz(2), plus)


def _parse_grid(text: str) -> Grid:
    try:
        w, h = text.lower().split("x")
        return Grid(int(w), int(h))
    except ValueError:
        raise ParseError(f"--grid expects WxH, got {text!r}") from None


def _parse_probe(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise ParseError(f"--probe expects N1,N2,..., got {text!r}") from None


def _sniff(text: str) -> str:
    for line in text.splitlines():
        parts = line.split("#", 1)[0].split()
        if not parts:
            continue
        if parts[0].startswith("P"):
            return "pbm"
        if parts[0] == "grid":
            return "dump" if len(parts) > 3 and parts[3] == "mode" else "spec"
        break
    return "unknown"


class _Input:
    """A loaded input file: a bitmap, a shape spec (as an image) or a memory dump."""

    def __init__(self, path: str, mode: str, grid: Grid | None):
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ParseError(f"cannot read {path}: {exc.strerror}") from None
        self.path = path
        self.kind = _sniff(text)
        self.bitmap: Bitmap | None = None
        self.image: StoredImage | None = None
        self.memory: MemoryState | None = None
        if self.kind == "pbm":
            self.bitmap = parse_pbm(text, source=path)
            self._check_grid(grid, self.bitmap.width, self.bitmap.height)
        elif self.kind == "spec":
            g, shapes = parse_shape_spec(text, source=path)
            self._check_grid(grid, g.width, g.height)
            self.image = StoredImage(g, tuple(shapes), mode)
        elif self.kind == "dump":
            self.memory = parse_memory_dump(text, source=path)
            self._check_grid(grid, self.memory.grid.width, self.memory.grid.height)
        else:
            raise ParseError(
                "unrecognized input: expected PBM 'P1', a shape spec or a state dump", source=path
            )
        self.mode = mode

    def _check_grid(self, grid, width, height):
        if grid is not None and (grid.width, grid.height) != (width, height):
            raise ParseError(
                f"--grid {grid.width}x{grid.height} does not match input {width}x{height}",
                source=self.path,
            )

    def stored_image(self) -> StoredImage:
        if self.image is None and self.bitmap is not None:
            self.image = image_from_bitmap(self.bitmap, self.mode)
        return self.image

    def memory_state(self) -> MemoryState:
        if self.memory is not None:
            return self.memory
        return store(self.stored_image())


def _emit(args, document: str, summary: str) -> None:
    if args.out:
        Path(args.out).write_text(document)
        sys.stdout.write(summary)
    else:
        sys.stdout.write(document)


def cmd_store(args) -> int:
    src = _Input(args.input, args.mode, args.grid)
    if src.kind == "dump":
        raise ParseError("store expects a shape spec or PBM, got a state dump", source=args.input)
    mem = src.memory_state()
    summary = (
        f"stored {mem.header.shape_count} shape(s) "
        f"{list(mem.header.vertex_counts)} on a {mem.grid.width}x{mem.grid.height} grid "
        f"in {mem.mode} mode; sparse size {len(mem.state)}\n"
    )
    _emit(args, dump_memory(mem), summary)
    return 0


def _retrieval_config(args, header_counts) -> RetrievalConfig:
    counts = args.probe if args.probe else header_counts
    return RetrievalConfig(
        mode=SHOTS if args.shots else EXACT,
        shots=args.shots or 4096,
        vertex_counts=counts,
        margin=args.margin,
        restarts=args.restarts,
        seed=args.seed,
        workers=args.workers,
    )


def cmd_retrieve(args) -> int:
    src = _Input(args.input, args.mode, args.grid)
    if src.kind == "dump":
        mem = src.memory
        oracle = PreparationOracle(MemoryPreparer(mem))
    else:
        image = src.stored_image()
        mem = store(image)
        oracle = PreparationOracle(MemoryPreparer(image))
    config = _retrieval_config(args, mem.header.vertex_counts)
    report = find_shapes(oracle, mem.grid, config)
    if args.pbm:
        cells = [c for coords in report.found_coordinates() for c in coords]
        Path(args.pbm).write_text(write_pbm(Bitmap.from_cells(mem.grid.width, mem.grid.height, cells)))
    counts = recognize_scale_invariant(report)
    summary = summarize_report(report) + "vertex counts: " + (
        "{" + ", ".join(str(c) for c in sorted(counts.elements())) + "}\n"
    )
    _emit(args, render_report(report), summary)
    return 0


def _fmt(x: float) -> str:
    return format(x + 0.0, ".12g")


def cmd_witness(args) -> int:
    if args.input in BUILTIN_STATES:
        name, state = args.input, _builtin_state(args.input)
    else:
        src = _Input(args.input, args.mode, args.grid)
        name, state = args.input, src.memory_state().state
    if not 2 <= state.n_qubits <= 6:
        raise SizeError(f"witness evaluation needs 2 to 6 qubits, state has {state.n_qubits}")
    rho = to_density(state)
    result = max_svetlichny(
        rho, restarts=args.restarts, rng=np.random.default_rng(args.seed), margin=args.margin
    )
    s = result.settings
    doc = "\n".join(
        [
            "ghzmem-witness 1",
            f"state {name}",
            f"seed {args.seed}",
            f"restarts {args.restarts}",
            f"parties {result.n_parties}",
            f"value {_fmt(result.value)}",
            f"bound {_fmt(result.biseparable_bound)}",
            f"quantum_max {_fmt(result.quantum_max)}",
            f"threshold {_fmt(result.threshold)}",
            f"violated {int(result.violated)}",
            "phi " + ",".join(_fmt(a) for a in s.phi),
            "phi_prime " + ",".join(_fmt(a) for a in s.phi_prime),
        ]
    ) + "\n"
    verdict = "violated: genuine" if result.violated else "not violated"
    summary = (
        f"{name}: max Svetlichny value {result.value:.6f}, biseparable bound "
        f"{result.biseparable_bound:g}, {verdict}"
        + (f" {result.n_parties}-party entanglement\n" if result.violated else "\n")
    )
    _emit(args, doc, summary)
    return 0


def cmd_grover(args) -> int:
    src = _Input(args.input, CLASSICAL, args.grid)
    if src.kind == "pbm":
        width, height = src.bitmap.width, src.bitmap.height
        marked = [y * width + x for x, y in src.bitmap.black_pixels()]
    elif src.kind == "dump":
        mem = src.memory
        if mem.mode != CLASSICAL:
            raise ModeError(
                "Grover search needs a classical memory; this dump is entangled "
                "(use 'retrieve' to read entangled memories)"
            )
        width, height = mem.grid.width, mem.grid.height
        marked = marked_cells(mem)
    else:
        mem = store(src.stored_image())
        width, height = mem.grid.width, mem.grid.height
        marked = marked_cells(mem)
    n = width * height
    rng = np.random.default_rng(args.seed)
    search = locate_marked(n, marked, rng, args.max_repeats)
    lines = [
        "ghzmem-grover 1",
        f"grid {width} {height}",
        f"seed {args.seed}",
        f"address_space {search.address_space_size}",
        f"marked {len(marked)}",
        f"runs {len(search.runs)}",
    ]
    for i, run in enumerate(search.runs, 1):
        lines.append(
            f"run {i} iterations {run.iterations} probability {_fmt(run.success_probability)} "
            f"address {run.sampled_address} hit {int(run.hit)}"
        )
    lines.append(f"found {len(search.found)}")
    for q in sorted(search.found):
        lines.append(f"vertex {q % width},{q // width}")
    lines += [
        f"complete {int(search.complete)}",
        f"oracle_queries {search.oracle_queries}",
        f"expected_queries {_fmt(search.expected_queries)}",
    ]
    summary = (
        f"recovered {len(search.found)} of {len(marked)} vertices in {len(search.runs)} "
        f"Grover run(s), {search.oracle_queries} oracle queries"
        + ("" if search.complete else " (incomplete)")
        + "\n"
    )
    _emit(args, "\n".join(lines) + "\n", summary)
    return 0


def cmd_inspect(args) -> int:
    src = _Input(args.input, args.mode, args.grid)
    mem = src.memory_state()
    ov = overlap(initial_memory(mem.grid), mem)
    lines = [
        "ghzmem-inspect 1",
        f"grid {mem.grid.width} {mem.grid.height}",
        f"mode {mem.mode}",
        f"shapes {mem.header.shape_count}",
        "counts " + (",".join(map(str, mem.header.vertex_counts)) or "-"),
        f"sparse_size {len(mem.state)}",
        f"overlap_initial {_fmt(ov.real)} {_fmt(ov.imag)}",
    ]
    if src.image is not None:
        for verts in src.image.vertex_sets():
            if len(verts) >= 2:
                p = ghz_projector_probability(mem, sorted(verts))
                lines.append("projector " + ",".join(map(str, sorted(verts))) + f" {_fmt(p)}")
                if mem.mode == ENTANGLED and len(verts) <= 6:
                    red = partial_trace(mem.state, sorted(verts))
                    ghz = to_density(make_ghz(len(verts)))
                    lines.append(f"reduced_is_ghz {int(red.allclose(ghz))}")
    doc = "\n".join(lines) + "\n"
    _emit(args, doc, doc)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ghzmem", description="Binary-image memories in simulated GHZ-entangled qubit arrays."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid", type=_parse_grid, help="expected grid size WxH")
    common.add_argument("--mode", choices=(CLASSICAL, ENTANGLED), default=ENTANGLED)
    shots = common.add_mutually_exclusive_group()
    shots.add_argument("--exact", action="store_true", help="read reduced states directly (default)")
    shots.add_argument("--shots", type=int, metavar="K", help="shots per correlator")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--margin", type=float, default=DEFAULT_MARGIN)
    common.add_argument("--probe", type=_parse_probe, help="vertex counts to probe, e.g. 3,3")
    common.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--out", metavar="PATH", help="write the machine-readable output here")

    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("store", parents=[common], help="store an image and dump the memory state")
    p.add_argument("input")
    p.set_defaults(func=cmd_store)

    p = sub.add_parser("retrieve", parents=[common], help="find stored shapes by witness tests")
    p.add_argument("input")
    p.add_argument("--pbm", metavar="PATH", help="write the reconstructed image as PBM")
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("witness", parents=[common], help="maximize the Svetlichny witness")
    p.add_argument("input", help=f"one of {', '.join(BUILTIN_STATES)} or a state dump")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("grover", parents=[common], help="Grover vertex search on a classical image")
    p.add_argument("input")
    p.add_argument("--max-repeats", type=int, default=100)
    p.set_defaults(func=cmd_grover)

    p = sub.add_parser("inspect", parents=[common], help="describe a memory state")
    p.add_argument("input")
    p.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GhzMemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
