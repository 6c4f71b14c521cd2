"""Projective measurement, expectation values and equatorial correlators.

Equatorial settings are single angles ``phi``; the measured single-qubit
observable is ``cos(phi) X + sin(phi) Y`` with outcomes +1 and -1.
"""

from __future__ import annotations

import string
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import DimensionError, InternalError, OperatorError, ProbabilityError, SizeError
from .state import MAX_REDUCED_QUBITS, DensityOperator, SparseState, reduced_matrix

IDENTITY = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_PAULI_XY = np.stack([PAULI_X, PAULI_Y])

OPERATOR_TOL = 1e-10


def equatorial_observable(phi: float) -> np.ndarray:
    return np.cos(phi) * PAULI_X + np.sin(phi) * PAULI_Y


def kron_all(matrices) -> np.ndarray:
    return reduce(np.kron, matrices)


class ProjectiveMeasurement:
    """Complete set of orthogonal projectors with one real outcome label each."""

    def __init__(self, projectors, outcomes):
        projs = [np.array(p, dtype=complex) for p in projectors]
        outs = [float(a) for a in outcomes]
        if not projs or len(projs) != len(outs):
            raise OperatorError("need one outcome label per projector")
        if len(set(outs)) != len(outs):
            raise OperatorError(f"outcome labels must be distinct, got {outs}")
        dim = projs[0].shape[0]
        for p in projs:
            if p.shape != (dim, dim):
                raise DimensionError("projectors have inconsistent shapes")
            if np.max(np.abs(p - p.conj().T)) > OPERATOR_TOL:
                raise OperatorError("projector is not Hermitian")
            if np.max(np.abs(p @ p - p)) > OPERATOR_TOL:
                raise OperatorError("projector is not idempotent")
        if np.max(np.abs(sum(projs) - np.eye(dim))) > OPERATOR_TOL:
            raise OperatorError("projectors do not sum to the identity")
        n = dim.bit_length() - 1
        if (1 << n) != dim or n < 1:
            raise DimensionError(f"projector dimension {dim} is not a power of two")
        for p in projs:
            p.setflags(write=False)
        self.projectors = tuple(projs)
        self.outcomes = tuple(outs)
        self.n_qubits = n

    def observable(self) -> np.ndarray:
        """``sum_i a_i P_i``."""
        return sum(a * p for a, p in zip(self.outcomes, self.projectors))


def computational_measurement(outcomes=(0.0, 1.0)) -> ProjectiveMeasurement:
    """Single-qubit ``{|0><0|, |1><1|}`` measurement."""
    p0 = np.array([[1, 0], [0, 0]], dtype=complex)
    p1 = np.array([[0, 0], [0, 1]], dtype=complex)
    return ProjectiveMeasurement([p0, p1], outcomes)


def equatorial_measurement(phi: float) -> ProjectiveMeasurement:
    """Eigenprojectors of ``cos(phi) X + sin(phi) Y`` with outcomes (+1, -1)."""
    plus = np.array([1.0, np.exp(1j * phi)]) / np.sqrt(2)
    minus = np.array([1.0, -np.exp(1j * phi)]) / np.sqrt(2)
    return ProjectiveMeasurement(
        [np.outer(plus, plus.conj()), np.outer(minus, minus.conj())], (1.0, -1.0)
    )


@dataclass(frozen=True)
class MeasurementRecord:
    outcome: float
    post_state: SparseState
    probability: float
    index: int


def outcome_probabilities(state: SparseState, m: ProjectiveMeasurement) -> np.ndarray:
    if state.n_qubits != m.n_qubits:
        raise DimensionError(f"{m.n_qubits}-qubit measurement on {state.n_qubits}-qubit state")
    vec = state.to_dense()
    return np.array([np.vdot(vec, p @ vec).real for p in m.projectors])


def measure(state: SparseState, m: ProjectiveMeasurement, rng) -> MeasurementRecord:
    """Draw one outcome with probability ``<psi|P_i|psi>`` and collapse the state.

    ``rng`` is any object with a ``random()`` method returning floats in [0, 1).
    """
    probs = np.clip(outcome_probabilities(state, m), 0.0, None)
    u = rng.random() * probs.sum()
    i = int(np.searchsorted(np.cumsum(probs), u, side="right"))
    i = min(i, len(probs) - 1)
    p = float(probs[i])
    if p <= 0.0:
        raise InternalError("selected a zero-probability measurement branch")
    post = m.projectors[i] @ state.to_dense() / np.sqrt(p)
    return MeasurementRecord(m.outcomes[i], SparseState.from_dense(post, normalize=True), p, i)


def expectation(rho: DensityOperator, observable) -> float:
    obs = np.asarray(observable, dtype=complex)
    if obs.shape != rho.matrix.shape:
        raise DimensionError(f"observable shape {obs.shape} vs operator {rho.matrix.shape}")
    if np.max(np.abs(obs - obs.conj().T)) > OPERATOR_TOL:
        raise OperatorError("observable is not Hermitian")
    val = np.trace(rho.matrix @ obs)
    if abs(val.imag) >= OPERATOR_TOL:
        raise InternalError(f"expectation has imaginary part {val.imag!r}")
    return float(val.real)


def correlation_tensor(rho: DensityOperator) -> np.ndarray:
    """``T[i_1..i_k] = Tr(rho sigma_{i_1} x ... x sigma_{i_k})`` with ``i`` in {x, y}.

    Returned as a real array of shape ``(2,) * k``.
    """
    k = rho.n_qubits
    if k > MAX_REDUCED_QUBITS:
        raise SizeError(f"correlators limited to {MAX_REDUCED_QUBITS} qubits")
    letters = string.ascii_letters
    rows, cols, outs = letters[:k], letters[k : 2 * k], letters[2 * k : 3 * k]
    # Tr(rho O) = sum_ab rho[a, b] O[b, a]
    spec = ",".join([rows + cols] + [outs[j] + cols[j] + rows[j] for j in range(k)])
    t = np.einsum(spec + "->" + outs, rho.matrix.reshape([2] * (2 * k)), *[_PAULI_XY] * k, optimize=True)
    return t.real


def correlation_tensor_sparse(state: SparseState, subset: Sequence[int]) -> np.ndarray:
    """Same tensor as :func:`correlation_tensor` of the reduced state, read off the amplitudes.

    X and Y both flip a bit, so only label pairs differing exactly on ``subset``
    contribute; Y adds a factor ``i(-1)^bit``. Supports far from flip-closed give
    an exact zero without building any matrix.
    """
    n = state.n_qubits
    k = len(subset)
    shifts = [n - 1 - q for q in subset]
    mask = 0
    for s in shifts:
        mask |= 1 << s
    amps = state.indices()
    total = np.zeros((2,) * k, dtype=complex)
    for idx, amp in amps.items():
        partner = amps.get(idx ^ mask)
        if partner is None:
            continue
        term = np.array(amp * partner.conjugate())
        for s in shifts:
            bit = (idx >> s) & 1
            term = np.multiply.outer(term, np.array([1.0, 1j * (-1) ** bit]))
        total += term
    return total.real


def contract_settings(tensor: np.ndarray, settings: Sequence[float]) -> float:
    """Contract a correlation tensor with the unit vectors ``(cos phi, sin phi)``."""
    out = tensor
    for phi in settings:
        out = np.tensordot(np.array([np.cos(phi), np.sin(phi)]), out, axes=(0, 0))
    return float(out)


def correlator(rho: DensityOperator, settings: Sequence[float]) -> float:
    """Expectation of the tensor product of equatorial observables at ``settings``."""
    if len(settings) != rho.n_qubits:
        raise DimensionError(f"{len(settings)} settings for {rho.n_qubits} qubits")
    return contract_settings(correlation_tensor(rho), settings)


class PreparationOracle:
    """Source of identically prepared copies of a state, counting every copy consumed.

    ``prepare`` builds the state (a :class:`SparseState` or anything with a
    ``state`` attribute holding one). Copies are identical pure states, so a
    batch of ``count`` preparations is built once and charged ``count`` times.
    """

    def __init__(self, prepare: Callable):
        self._prepare = prepare
        self.consumed = 0

    def draw(self, count: int = 1) -> SparseState:
        if count < 1:
            raise ValueError("must draw at least one preparation")
        made = self._prepare()
        self.consumed += count
        return getattr(made, "state", made)

    def reference(self):
        """The prepared object itself, uncharged. Exact-mode simulation only."""
        return self._prepare()


def outcome_distribution(rho_matrix: np.ndarray, settings: Sequence[float]) -> np.ndarray:
    """Joint distribution of the per-qubit equatorial outcomes.

    Entry ``j`` is the probability of the outcome string whose bits are the
    binary digits of ``j`` (bit 0 means +1, bit 1 means -1; first qubit is the
    most significant digit).
    """
    basis = [
        np.array([[1.0, 1.0], [np.exp(1j * phi), -np.exp(1j * phi)]]) / np.sqrt(2)
        for phi in settings
    ]
    v = kron_all(basis)
    probs = np.einsum("ij,ik,kj->j", v.conj(), rho_matrix, v).real
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum()


def _parity_signs(k: int) -> np.ndarray:
    idx = np.arange(1 << k)
    ones = np.zeros_like(idx)
    for b in range(k):
        ones += (idx >> b) & 1
    return np.where(ones % 2 == 0, 1.0, -1.0)


def sample_correlator(
    oracle: PreparationOracle,
    subset: Sequence[int],
    settings: Sequence[float],
    shots: int,
    rng: np.random.Generator,
) -> float:
    """Empirical mean of the +-1 outcome products over ``shots`` fresh preparations."""
    if shots < 1:
        raise ProbabilityError("shots must be positive")
    if len(settings) != len(subset):
        raise DimensionError(f"{len(settings)} settings for {len(subset)} qubits")
    state = oracle.draw(shots)
    probs = outcome_distribution(reduced_matrix(state, list(subset)), settings)
    counts = rng.multinomial(shots, probs)
    return float(counts @ _parity_signs(len(subset))) / shots
