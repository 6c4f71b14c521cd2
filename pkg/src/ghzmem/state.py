"""Sparse pure states and small dense density operators.

Basis labels are bitstrings with qubit 0 leftmost. Internally a label is the
integer whose binary expansion (``n_qubits`` digits, most significant first)
is that bitstring, so integer order is label order and the integer is also the
index into the dense ``np.kron`` ordering.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence

import numpy as np

from .errors import DimensionError, ProbabilityError, QubitIndexError, SizeError

MAX_QUBITS = 30
MAX_DENSE_QUBITS = 12
MAX_REDUCED_QUBITS = 6
PRUNE_TOL = 1e-15
NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
# eigvalsh on larger operators is too slow to run on every construction
_PSD_CHECK_MAX_DIM = 256


def _check_n(n: int, limit: int = MAX_QUBITS) -> int:
    if isinstance(n, bool) or int(n) != n:
        raise SizeError(f"qubit count must be an integer, got {n!r}")
    n = int(n)
    if not 1 <= n <= limit:
        raise SizeError(f"qubit count {n} outside [1, {limit}]")
    return n


def label_to_int(label, n_qubits: int) -> int:
    """Convert a bitstring, bit sequence or integer label to its integer form."""
    if isinstance(label, (int, np.integer)) and not isinstance(label, bool):
        idx = int(label)
        if not 0 <= idx < (1 << n_qubits):
            raise DimensionError(f"label {idx} out of range for {n_qubits} qubits")
        return idx
    if isinstance(label, str):
        bits = label.strip()
        if len(bits) != n_qubits or set(bits) - {"0", "1"}:
            raise DimensionError(f"bad label {label!r} for {n_qubits} qubits")
        return int(bits, 2)
    bits = list(label)
    if len(bits) != n_qubits or any(b not in (0, 1) for b in bits):
        raise DimensionError(f"bad label {label!r} for {n_qubits} qubits")
    idx = 0
    for b in bits:
        idx = (idx << 1) | int(b)
    return idx


def int_to_label(idx: int, n_qubits: int) -> str:
    return format(idx, f"0{n_qubits}b")


class SparseState:
    """Normalized pure state stored as ``{label: amplitude}`` with zero entries pruned.

    Instances are immutable; every operation returns a new state.
    """

    __slots__ = ("_n", "_amps")

    def __init__(self, n_qubits: int, amplitudes: Mapping, *, normalize: bool = False):
        n = _check_n(n_qubits)
        amps: dict[int, complex] = {}
        for label, value in amplitudes.items():
            idx = label_to_int(label, n)
            a = complex(value)
            if not (np.isfinite(a.real) and np.isfinite(a.imag)):
                raise ProbabilityError(f"non-finite amplitude at {int_to_label(idx, n)}")
            amps[idx] = amps.get(idx, 0j) + a
        norm2 = sum(abs(a) ** 2 for a in amps.values())
        if normalize:
            if norm2 == 0.0:
                raise ProbabilityError("cannot normalize the zero vector")
            scale = 1.0 / np.sqrt(norm2)
            amps = {k: a * scale for k, a in amps.items()}
        elif abs(norm2 - 1.0) > NORM_TOL:
            raise ProbabilityError(f"state norm^2 = {norm2!r}, expected 1")
        self._n = n
        self._amps = {k: a for k, a in sorted(amps.items()) if abs(a) >= PRUNE_TOL}

    @property
    def n_qubits(self) -> int:
        return self._n

    def __len__(self) -> int:
        return len(self._amps)

    def __iter__(self):
        return iter(self._amps.items())

    def __repr__(self) -> str:
        body = ", ".join(f"{self.label(k)}: {a:.6g}" for k, a in self._amps.items())
        return f"SparseState({self._n}, {{{body}}})"

    def label(self, idx: int) -> str:
        return int_to_label(idx, self._n)

    def amplitude(self, label) -> complex:
        return self._amps.get(label_to_int(label, self._n), 0j)

    def amplitudes(self) -> dict[str, complex]:
        """Copy of the amplitudes keyed by bitstring."""
        return {self.label(k): a for k, a in self._amps.items()}

    def indices(self) -> dict[int, complex]:
        """Copy of the amplitudes keyed by integer label."""
        return dict(self._amps)

    def norm(self) -> float:
        return float(np.sqrt(sum(abs(a) ** 2 for a in self._amps.values())))

    def to_dense(self) -> np.ndarray:
        if self._n > MAX_DENSE_QUBITS:
            raise SizeError(f"dense conversion limited to {MAX_DENSE_QUBITS} qubits")
        vec = np.zeros(1 << self._n, dtype=complex)
        for k, a in self._amps.items():
            vec[k] = a
        return vec

    @classmethod
    def from_dense(cls, vector, *, normalize: bool = False) -> "SparseState":
        vec = np.asarray(vector, dtype=complex).ravel()
        n = int(vec.size).bit_length() - 1
        if vec.size < 2 or (1 << n) != vec.size:
            raise DimensionError(f"vector length {vec.size} is not a power of two >= 2")
        nz = np.flatnonzero(np.abs(vec) >= PRUNE_TOL)
        return cls(n, {int(k): vec[k] for k in nz}, normalize=normalize)

    def isclose(self, other: "SparseState", atol: float = 1e-12) -> bool:
        if self._n != other._n:
            return False
        keys = self._amps.keys() | other._amps.keys()
        return all(abs(self._amps.get(k, 0j) - other._amps.get(k, 0j)) <= atol for k in keys)

    def dump(self) -> str:
        """Text dump: one ``label re im`` line per stored amplitude, sorted by label."""
        lines = []
        for k, a in self._amps.items():
            # adding 0.0 turns -0.0 into 0.0 so dumps are stable
            lines.append(f"{self.label(k)} {a.real + 0.0!r} {a.imag + 0.0!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def parse_dump(cls, lines: Iterable[str], n_qubits: int | None = None) -> "SparseState":
        from .errors import ParseError

        amps = {}
        for lineno, raw in enumerate(lines, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ParseError("expected 'label re im'", line=lineno)
            label = parts[0]
            if n_qubits is None:
                n_qubits = len(label)
            if len(label) != n_qubits or set(label) - {"0", "1"}:
                raise ParseError(f"bad basis label {label!r}", line=lineno)
            try:
                amps[label] = complex(float(parts[1]), float(parts[2]))
            except ValueError:
                raise ParseError("amplitude is not a number", line=lineno) from None
        if n_qubits is None or not amps:
            raise ParseError("state dump holds no amplitudes")
        try:
            return cls(n_qubits, amps)
        except ProbabilityError as exc:
            raise ParseError(str(exc)) from None


class DensityOperator:
    """Hermitian, unit-trace, positive semidefinite operator on ``n_qubits`` qubits."""

    __slots__ = ("_n", "_matrix")

    def __init__(self, matrix, *, check: bool = True):
        mat = np.array(matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise DimensionError(f"density matrix must be square, got shape {mat.shape}")
        dim = mat.shape[0]
        n = dim.bit_length() - 1
        if dim < 2 or (1 << n) != dim:
            raise DimensionError(f"dimension {dim} is not a power of two >= 2")
        _check_n(n, MAX_DENSE_QUBITS)
        if check:
            if np.max(np.abs(mat - mat.conj().T)) > HERMITIAN_TOL:
                raise DimensionError("density matrix is not Hermitian")
            tr = np.trace(mat)
            if abs(tr - 1.0) > NORM_TOL:
                raise ProbabilityError(f"density matrix trace {tr!r}, expected 1")
            if dim <= _PSD_CHECK_MAX_DIM:
                if np.linalg.eigvalsh(mat).min() < -PSD_TOL:
                    raise ProbabilityError("density matrix has a negative eigenvalue")
        mat.setflags(write=False)
        self._n = n
        self._matrix = mat

    @property
    def n_qubits(self) -> int:
        return self._n

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def dim(self) -> int:
        return self._matrix.shape[0]

    def trace(self) -> complex:
        return complex(np.trace(self._matrix))

    def __repr__(self) -> str:
        return f"DensityOperator(n_qubits={self._n})"

    def allclose(self, other, atol: float = 1e-12) -> bool:
        other_m = other.matrix if isinstance(other, DensityOperator) else np.asarray(other)
        return other_m.shape == self._matrix.shape and np.allclose(
            self._matrix, other_m, rtol=0.0, atol=atol
        )


def new_zero_state(n: int) -> SparseState:
    """All qubits in ``|0>``."""
    return SparseState(_check_n(n), {0: 1.0})


def basis_state(bits) -> SparseState:
    if isinstance(bits, str):
        n = len(bits)
    else:
        bits = list(bits)
        n = len(bits)
    return SparseState(n, {label_to_int(bits, _check_n(n)): 1.0})


def tensor(a: SparseState, b: SparseState) -> SparseState:
    n = a.n_qubits + b.n_qubits
    if n > MAX_QUBITS:
        raise SizeError(f"tensor product would have {n} qubits (limit {MAX_QUBITS})")
    nb = b.n_qubits
    amps = {}
    for ka, va in a:
        for kb, vb in b:
            amps[(ka << nb) | kb] = va * vb
    # products of normalized states can drift by a few ulps
    return SparseState(n, amps, normalize=True)


def inner(a: SparseState, b: SparseState) -> complex:
    """``<a|b>``."""
    if a.n_qubits != b.n_qubits:
        raise DimensionError(f"inner product of {a.n_qubits}- and {b.n_qubits}-qubit states")
    bmap = b.indices()
    return sum((va.conjugate() * bmap[k] for k, va in a if k in bmap), 0j)


def to_density(s: SparseState) -> DensityOperator:
    if s.n_qubits > MAX_DENSE_QUBITS:
        raise SizeError(f"dense density operator limited to {MAX_DENSE_QUBITS} qubits")
    vec = s.to_dense()
    return DensityOperator(np.outer(vec, vec.conj()))


def mixture(states: Sequence[DensityOperator], probs: Sequence[float]) -> DensityOperator:
    """Convex combination ``sum_i p_i rho_i``."""
    if len(states) == 0 or len(states) != len(probs):
        raise ProbabilityError("need one weight per state and at least one state")
    p = np.asarray(probs, dtype=float)
    if np.any(p < 0) or abs(p.sum() - 1.0) > NORM_TOL:
        raise ProbabilityError(f"weights must be non-negative and sum to 1, got {list(p)}")
    dims = {rho.dim for rho in states}
    if len(dims) != 1:
        raise DimensionError(f"mixed dimensions {sorted(dims)}")
    total = sum(w * rho.matrix for w, rho in zip(p, states))
    return DensityOperator(total)


def _check_keep(keep, n: int) -> list[int]:
    keep = [int(q) for q in keep]
    if not keep:
        raise QubitIndexError("partial trace needs at least one kept qubit")
    if len(set(keep)) != len(keep):
        raise QubitIndexError(f"repeated qubit index in {keep}")
    bad = [q for q in keep if not 0 <= q < n]
    if bad:
        raise QubitIndexError(f"qubit indices {bad} out of range for {n} qubits")
    if len(keep) > MAX_REDUCED_QUBITS:
        raise SizeError(f"reduced operators limited to {MAX_REDUCED_QUBITS} qubits")
    return keep


def reduced_matrix(state: SparseState, keep: Sequence[int]) -> np.ndarray:
    """Unvalidated reduced density matrix of a sparse state (kept qubits in ``keep`` order)."""
    n = state.n_qubits
    shifts = [n - 1 - q for q in keep]
    keep_mask = 0
    for s in shifts:
        keep_mask |= 1 << s
    groups: dict[int, list[tuple[int, complex]]] = {}
    for idx, amp in state:
        sub = 0
        for s in shifts:
            sub = (sub << 1) | ((idx >> s) & 1)
        groups.setdefault(idx & ~keep_mask, []).append((sub, amp))
    dim = 1 << len(keep)
    out = np.zeros((dim, dim), dtype=complex)
    for entries in groups.values():
        vec = np.zeros(dim, dtype=complex)
        for sub, amp in entries:
            vec[sub] = amp
        out += np.outer(vec, vec.conj())
    return out


def partial_trace(source, keep: Sequence[int]) -> DensityOperator:
    """Trace out every qubit not in ``keep``; output qubit ``j`` is input qubit ``keep[j]``."""
    if isinstance(source, SparseState):
        keep = _check_keep(keep, source.n_qubits)
        return DensityOperator(reduced_matrix(source, keep))
    n = source.n_qubits
    keep = _check_keep(keep, n)
    rest = [q for q in range(n) if q not in keep]
    k, r = len(keep), len(rest)
    t = source.matrix.reshape([2] * (2 * n))
    perm = keep + rest + [n + q for q in keep] + [n + q for q in rest]
    t = t.transpose(perm).reshape(1 << k, 1 << r, 1 << k, 1 << r)
    return DensityOperator(np.trace(t, axis1=1, axis2=3))
