"""Shared fixtures and independent dense oracles.

The oracles here use only numpy (Kronecker products, explicit index loops)
and never call the library, so they can check it.
"""

import itertools
from functools import reduce

import numpy as np
import pytest

KET0 = np.array([1.0, 0.0], dtype=complex)
KET1 = np.array([0.0, 1.0], dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def kron(*ops):
    return reduce(np.kron, ops)


def dense_ghz(n):
    v = np.zeros(2**n, dtype=complex)
    v[0] = v[-1] = 1 / np.sqrt(2)
    return v


def place_block(block, positions, n):
    """Dense n-qubit vector: ``block`` on qubits ``positions`` (in order), |0> elsewhere."""
    k = len(positions)
    rest = [q for q in range(n) if q not in positions]
    full = kron(block, *([KET0] * (n - k))) if n > k else block
    t = full.reshape([2] * n)
    # axes currently ordered positions + rest; move them to their real slots
    t = np.moveaxis(t, list(range(n)), list(positions) + rest)
    return t.reshape(-1)


def dense_memory(n, vertex_sets):
    """Dense entangled memory built as a product of placed GHZ factors."""
    vec = np.zeros(2**n, dtype=complex)
    vec[0] = 1.0
    t = vec.reshape([2] * n)
    for verts in vertex_sets:
        verts = sorted(verts)
        k = len(verts)
        # act with |GHZ><0..0| on the (currently |0..0>) vertex qubits
        op = np.outer(dense_ghz(k), np.eye(2**k)[0]).reshape([2] * (2 * k))
        t = np.tensordot(op, t, axes=(list(range(k, 2 * k)), verts))
        t = np.moveaxis(t, list(range(k)), verts)
    return t.reshape(-1)


def loop_partial_trace(rho, n, keep):
    """Partial trace by summing matrix elements over every traced-out bitstring."""
    rest = [q for q in range(n) if q not in keep]
    k = len(keep)
    out = np.zeros((2**k, 2**k), dtype=complex)

    def index(kbits, rbits):
        bits = [0] * n
        for q, b in zip(keep, kbits):
            bits[q] = b
        for q, b in zip(rest, rbits):
            bits[q] = b
        return int("".join(map(str, bits)), 2)

    kets = list(itertools.product((0, 1), repeat=k))
    for i, ki in enumerate(kets):
        for j, kj in enumerate(kets):
            for r in itertools.product((0, 1), repeat=len(rest)):
                out[i, j] += rho[index(ki, r), index(kj, r)]
    return out


def equatorial(phi):
    return np.cos(phi) * SX + np.sin(phi) * SY


def random_pure(n, rng):
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return v / np.linalg.norm(v)


def random_density(n, rng, rank=None):
    rank = rank or 2**n
    g = rng.normal(size=(2**n, rank)) + 1j * rng.normal(size=(2**n, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(d, rng):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_ACCEPTANCE = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.failed):
        _ACCEPTANCE[number] = (title, "PASS" if report.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, verdict = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {verdict}  {title}")
