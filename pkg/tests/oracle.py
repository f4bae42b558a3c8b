"""Brute-force reference implementations used only by the tests.

Written from the definitions, with no code shared with the package: spin
operators from explicit Kronecker products, exponentials from scipy's expm,
code states from their amplitudes, invariants in a separately written Bell
basis.
"""

from __future__ import annotations

import itertools
from functools import reduce

import numpy as np
from scipy.linalg import expm

SX = np.array([[0, 1], [1, 0]]) / 2
SY = np.array([[0, -1j], [1j, 0]]) / 2
SZ = np.array([[1, 0], [0, -1]]) / 2
I2 = np.eye(2)


def site_op(op, site, n):
    return reduce(np.kron, [op if k == site else I2 for k in range(n)])


def dot(i, j, n):
    return sum(site_op(s, i, n) @ site_op(s, j, n) for s in (SX, SY, SZ))


def total_s2(n):
    tot = [sum(site_op(s, k, n) for k in range(n)) for s in (SX, SY, SZ)]
    return sum(t @ t for t in tot)


def total_sz(n):
    return sum(site_op(SZ, k, n) for k in range(n))


def exchange(i, j, n, tau):
    return expm(1j * 2 * np.pi * tau * dot(i, j, n))


def step(couplings, n):
    H = sum(t * dot(i, j, n) for i, j, t in couplings) if couplings else np.zeros((2**n, 2**n))
    return expm(1j * 2 * np.pi * H)


def evolve(steps, n):
    U = np.eye(2**n, dtype=complex)
    for s in steps:
        U = step(s, n) @ U
    return U


def basis_index(bits: str) -> int:
    """'udu' -> integer index with site 0 most significant, up = 0."""
    return int(bits.replace("u", "0").replace("d", "1"), 2)


def ket(amplitudes: dict, n: int):
    v = np.zeros(2**n, dtype=complex)
    for bits, a in amplitudes.items():
        v[basis_index(bits)] += a
    return v


S2 = 1 / np.sqrt(2)
ZERO_L = {"udu": S2, "duu": -S2}
ONE_L = {"uud": np.sqrt(2 / 3), "udu": -np.sqrt(1 / 3) * S2, "duu": -np.sqrt(1 / 3) * S2}


def code_states_two_blocks():
    """|00_L>, |01_L>, |10_L>, |11_L> on six spins, block A = sites 0..2."""
    out = []
    for a, b in itertools.product((ZERO_L, ONE_L), repeat=2):
        amp = {x + y: p * q for x, p in a.items() for y, q in b.items()}
        out.append(ket(amp, 6))
    return np.array(out).T


def code_states_one_block():
    return np.array([ket(ZERO_L, 3), ket(ONE_L, 3)]).T


# Bell basis with the phases that make local gates real orthogonal
BELL = np.array(
    [
        [1, 0, 0, 1j],
        [0, 1j, 1, 0],
        [0, 1j, -1, 0],
        [1, 0, 0, -1j],
    ]
) / np.sqrt(2)


def invariants(U):
    M = BELL.conj().T @ U @ BELL
    m = M.T @ M
    d = np.linalg.det(U)
    return np.trace(m) ** 2 / (16 * d), (np.trace(m) ** 2 - np.trace(m @ m)) / (4 * d)


def invariants_from_canonical(c1, c2, c3):
    """Invariants of exp(i/2 (c1 XX + c2 YY + c3 ZZ)) from the closed-form expressions."""
    g1 = (np.cos(c1) * np.cos(c2) * np.cos(c3)) ** 2 - (np.sin(c1) * np.sin(c2) * np.sin(c3)) ** 2 \
        + 0.25j * np.sin(2 * c1) * np.sin(2 * c2) * np.sin(2 * c3)
    g2 = 4 * (np.cos(c1) * np.cos(c2) * np.cos(c3)) ** 2 - 4 * (np.sin(c1) * np.sin(c2) * np.sin(c3)) ** 2 \
        - np.cos(2 * c1) * np.cos(2 * c2) * np.cos(2 * c3)
    return g1, g2


def canonical_gate(c1, c2, c3):
    X = np.array([[0, 1], [1, 0]])
    Y = np.array([[0, -1j], [1j, 0]])
    Z = np.diag([1, -1])
    return expm(0.5j * (c1 * np.kron(X, X) + c2 * np.kron(Y, Y) + c3 * np.kron(Z, Z)))


def taylor_exp(A, terms=40):
    out = np.eye(A.shape[0], dtype=complex)
    term = np.eye(A.shape[0], dtype=complex)
    for k in range(1, terms):
        term = term @ A / k
        out = out + term
    return out


def phase_free_distance(U, V):
    """max |U - e^{i phi} V| with phi taken from the overall overlap."""
    z = np.vdot(V.ravel(), U.ravel())
    ph = z / abs(z) if abs(z) > 0 else 1.0
    return float(np.max(np.abs(U - ph * V)))


def haar_2x2(rng):
    z = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def haar(d, rng):
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
