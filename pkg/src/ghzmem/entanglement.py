"""GHZ states and the Svetlichny witness for genuine N-partite entanglement.

The N-party Svetlichny polynomial is built from the Mermin-Klyshko pair
``(M, M')`` of the first N-1 parties, read off the product
``prod_k (A'_k + i A_k) = M' + i M``, and closed with the last party as

    S_N = M (A_N + A'_N) + M' (A_N - A'_N).

For N=2 this is CHSH, for N=3 the eight-term Svetlichny form. Biseparable
states satisfy ``|S_N| <= 2^(N-1)``; quantum states reach ``2^(N-1) sqrt(2)``.
"""

from __future__ import annotations

import itertools
import string
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionError, SizeError
from .measurement import (
    PreparationOracle,
    correlation_tensor,
    sample_correlator,
)
from .state import MAX_QUBITS, MAX_REDUCED_QUBITS, DensityOperator, SparseState, to_density

DEFAULT_MARGIN = 0.02
DEFAULT_RESTARTS = 32
DEFAULT_TOL = 1e-8
MAX_SWEEPS = 2000
# correlation tensors below this are treated as identically zero
_ZERO_TENSOR = 1e-14


def make_ghz(n: int) -> SparseState:
    """``(|0...0> + |1...1>) / sqrt(2)`` on ``n`` qubits."""
    if isinstance(n, bool) or int(n) != n or not 2 <= n <= MAX_QUBITS:
        raise SizeError(f"GHZ state needs 2 <= n <= {MAX_QUBITS}, got {n!r}")
    n = int(n)
    h = 1.0 / np.sqrt(2.0)
    return SparseState(n, {0: h, (1 << n) - 1: h})


def make_singlet() -> SparseState:
    h = 1.0 / np.sqrt(2.0)
    return SparseState(2, {"01": h, "10": -h})


@dataclass(frozen=True)
class SvetlichnySettings:
    """Per-party equatorial angle pairs (unprimed, primed), in radians."""

    phi: tuple[float, ...]
    phi_prime: tuple[float, ...]

    def __post_init__(self):
        if len(self.phi) != len(self.phi_prime):
            raise DimensionError("phi and phi_prime must have one entry per party")
        if len(self.phi) < 2:
            raise DimensionError("Svetlichny settings need at least two parties")
        object.__setattr__(self, "phi", tuple(float(x) for x in self.phi))
        object.__setattr__(self, "phi_prime", tuple(float(x) for x in self.phi_prime))

    @property
    def n_parties(self) -> int:
        return len(self.phi)

    def angles(self) -> np.ndarray:
        """Array of shape ``(N, 2)``: column 0 unprimed, column 1 primed."""
        return np.column_stack([self.phi, self.phi_prime])

    @classmethod
    def from_angles(cls, angles) -> "SvetlichnySettings":
        a = np.asarray(angles, dtype=float)
        wrapped = np.mod(a, 2 * np.pi)
        return cls(tuple(wrapped[:, 0]), tuple(wrapped[:, 1]))

    def choice(self, primed) -> list[float]:
        """Angles selected by a 0/1 (unprimed/primed) choice per party."""
        return [self.phi_prime[k] if p else self.phi[k] for k, p in enumerate(primed)]


@dataclass(frozen=True)
class SvetlichnyResult:
    value: float
    n_parties: int
    violated: bool
    settings: SvetlichnySettings
    margin: float = DEFAULT_MARGIN

    @property
    def biseparable_bound(self) -> float:
        return float(2 ** (self.n_parties - 1))

    @property
    def quantum_max(self) -> float:
        return float(2 ** (self.n_parties - 1) * np.sqrt(2.0))

    @property
    def threshold(self) -> float:
        return self.biseparable_bound * (1.0 + self.margin)


def _check_parties(n: int) -> None:
    if not 2 <= n <= MAX_REDUCED_QUBITS:
        raise SizeError(f"Svetlichny witness needs 2 <= N <= {MAX_REDUCED_QUBITS}, got {n}")


@lru_cache(maxsize=None)
def svetlichny_coefficients(n: int) -> np.ndarray:
    """Sign tensor ``C[s_1..s_N]`` (0 = unprimed, 1 = primed setting)."""
    _check_parties(n)
    z = {(): 1 + 0j}
    for _ in range(n - 1):
        nxt = {}
        for key, c in z.items():
            nxt[key + (1,)] = c  # A'
            nxt[key + (0,)] = 1j * c  # i A
        z = nxt
    coeffs = np.zeros((2,) * n)
    for key, c in z.items():
        m, m_prime = c.imag, c.real
        coeffs[key + (0,)] = m + m_prime
        coeffs[key + (1,)] = m - m_prime
    coeffs.setflags(write=False)
    return coeffs


def svetlichny_terms(n: int) -> list[tuple[tuple[int, ...], int]]:
    """Nonzero ``(primed choices, sign)`` pairs, one per setting combination."""
    c = svetlichny_coefficients(n)
    return [(s, int(c[s])) for s in itertools.product((0, 1), repeat=n) if c[s] != 0]


class _Contractor:
    """Precomputed einsum strings for batched evaluation over restarts.

    ``U`` has shape ``(R, N, 2, 2)``: ``U[r, k, s, i]`` is the ``i``-th Bloch
    component (x or y) of party ``k``'s setting ``s``.
    """

    def __init__(self, n: int):
        letters = string.ascii_lowercase
        pauli, choice = letters[:n], letters[n : 2 * n]
        self.n = n
        self._value = (
            ",".join([pauli, choice] + [f"z{choice[k]}{pauli[k]}" for k in range(n)]) + "->z"
        )
        self._blocks = []
        for k in range(n):
            others = [f"z{choice[j]}{pauli[j]}" for j in range(n) if j != k]
            self._blocks.append(",".join([pauli, choice] + others) + f"->z{choice[k]}{pauli[k]}")

    def value(self, t, c, u) -> np.ndarray:
        return np.einsum(self._value, t, c, *[u[:, k] for k in range(self.n)], optimize="greedy")

    def block(self, t, c, u, k) -> np.ndarray:
        others = [u[:, j] for j in range(self.n) if j != k]
        return np.einsum(self._blocks[k], t, c, *others, optimize="greedy")


@lru_cache(maxsize=None)
def _contractor(n: int) -> _Contractor:
    return _Contractor(n)


def _unit_vectors(angles: np.ndarray) -> np.ndarray:
    return np.stack([np.cos(angles), np.sin(angles)], axis=-1)


def svetlichny_from_tensor(tensor: np.ndarray, s: SvetlichnySettings) -> float:
    n = tensor.ndim
    if s.n_parties != n:
        raise DimensionError(f"{s.n_parties}-party settings for a {n}-qubit tensor")
    _check_parties(n)
    u = _unit_vectors(s.angles())[None]
    return float(_contractor(n).value(tensor, svetlichny_coefficients(n), u)[0])


def svetlichny_value(rho: DensityOperator, s: SvetlichnySettings) -> float:
    """Signed sum of the ``2^N`` correlators of the Svetlichny polynomial."""
    if s.n_parties != rho.n_qubits:
        raise DimensionError(f"{s.n_parties}-party settings for {rho.n_qubits} qubits")
    _check_parties(rho.n_qubits)
    return svetlichny_from_tensor(correlation_tensor(rho), s)


def _ascend(tensor, angles, tol, max_sweeps):
    """Block coordinate ascent from a batch of starting angles ``(R, N, 2)``.

    With every other party fixed the objective is linear in party ``k``'s two
    unit vectors, so each is set to its block gradient's direction.
    """
    n = tensor.ndim
    con = _contractor(n)
    coeffs = svetlichny_coefficients(n)
    angles = angles.copy()
    u = _unit_vectors(angles)
    current = con.value(tensor, coeffs, u)
    for _ in range(max_sweeps):
        for k in range(n):
            g = con.block(tensor, coeffs, u, k)  # (R, 2 settings, 2 components)
            norms = np.linalg.norm(g, axis=-1)
            new = np.arctan2(g[..., 1], g[..., 0])
            angles[:, k, :] = np.where(norms > 0, new, angles[:, k, :])
            u[:, k] = _unit_vectors(angles[:, k, :])
        updated = con.value(tensor, coeffs, u)
        gain = np.max(updated - current)
        current = updated
        if gain < tol:
            break
    return angles, current


def max_svetlichny_tensor(
    tensor: np.ndarray,
    restarts: int = DEFAULT_RESTARTS,
    rng: np.random.Generator | None = None,
    margin: float = DEFAULT_MARGIN,
    tol: float = DEFAULT_TOL,
) -> SvetlichnyResult:
    n = tensor.ndim
    _check_parties(n)
    if restarts < 1:
        raise ValueError("restarts must be positive")
    if np.max(np.abs(tensor)) < _ZERO_TENSOR:
        # every equatorial correlator vanishes, so does the polynomial
        zero = SvetlichnySettings((0.0,) * n, (0.0,) * n)
        return SvetlichnyResult(0.0, n, False, zero, margin)
    rng = np.random.default_rng() if rng is None else rng
    starts = rng.uniform(0.0, 2 * np.pi, size=(restarts, n, 2))
    angles, values = _ascend(tensor, starts, tol, MAX_SWEEPS)
    best = int(np.argmax(values))
    value = float(values[best])
    settings = SvetlichnySettings.from_angles(angles[best])
    violated = abs(value) > 2 ** (n - 1) * (1.0 + margin)
    return SvetlichnyResult(value, n, violated, settings, margin)


def max_svetlichny(
    rho: DensityOperator,
    restarts: int = DEFAULT_RESTARTS,
    rng: np.random.Generator | None = None,
    margin: float = DEFAULT_MARGIN,
    tol: float = DEFAULT_TOL,
) -> SvetlichnyResult:
    """Largest Svetlichny value over equatorial settings, from ``restarts`` random starts.

    Flipping both settings of one party by pi negates the polynomial, so the
    maximum of the signed value is also the maximum of its absolute value.
    """
    _check_parties(rho.n_qubits)
    return max_svetlichny_tensor(correlation_tensor(rho), restarts, rng, margin, tol)


def is_genuinely_entangled(
    rho: DensityOperator,
    margin: float = DEFAULT_MARGIN,
    restarts: int = DEFAULT_RESTARTS,
    rng: np.random.Generator | None = None,
) -> tuple[bool, SvetlichnyResult]:
    result = max_svetlichny(rho, restarts=restarts, rng=rng, margin=margin)
    return result.violated, result


def shot_margin(shots: int, margin: float = DEFAULT_MARGIN) -> float:
    return max(margin, 5.0 / np.sqrt(shots))


@lru_cache(maxsize=None)
def ghz_optimal_settings(n: int) -> SvetlichnySettings:
    """Settings maximizing the polynomial on ``GHZ_n`` (deterministic search)."""
    result = max_svetlichny(
        to_density(make_ghz(n)), restarts=DEFAULT_RESTARTS, rng=np.random.default_rng(n)
    )
    return result.settings


def estimate_svetlichny(
    oracle: PreparationOracle,
    subset,
    settings: SvetlichnySettings,
    shots: int,
    rng: np.random.Generator,
    margin: float = DEFAULT_MARGIN,
) -> SvetlichnyResult:
    """Svetlichny value from sampled correlators, ``shots`` fresh preparations per term.

    The decision margin is widened to ``max(margin, 5/sqrt(shots))``.
    """
    n = len(subset)
    _check_parties(n)
    if settings.n_parties != n:
        raise DimensionError(f"{settings.n_parties}-party settings for {n} qubits")
    value = 0.0
    for primed, sign in svetlichny_terms(n):
        value += sign * sample_correlator(oracle, subset, settings.choice(primed), shots, rng)
    eff = shot_margin(shots, margin)
    violated = abs(value) > 2 ** (n - 1) * (1.0 + eff)
    return SvetlichnyResult(value, n, violated, settings, eff)
