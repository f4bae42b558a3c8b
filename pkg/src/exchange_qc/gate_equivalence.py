"""Local invariants of two-qubit gates and recovery of one-qubit corrections.

Two gates are locally equivalent when ``V = e^{i phi} (A1 x A2) U (B1 x B2)`` for
one-qubit unitaries A, B. The pair (m1, m2) below (Makhlin's invariants, in the
magic-basis form) is a complete set of invariants for that relation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm, polar
from scipy.optimize import least_squares

from .errors import DomainError, NoSolutionError
from .spin_core import phase_distance

UNITARY_TOL = 1e-8
POLAR_TRUST = 1e-3

MAGIC = np.array(
    [[1, 0, 0, 1j], [0, 1j, 1, 0], [0, 1j, -1, 0], [1, 0, 0, -1j]],
    dtype=np.complex128,
) / np.sqrt(2)

CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128)
CZ = np.diag([1, 1, 1, -1]).astype(np.complex128)
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=np.complex128)
SQRT_SWAP = np.array(
    [[1, 0, 0, 0], [0, (1 + 1j) / 2, (1 - 1j) / 2, 0], [0, (1 - 1j) / 2, (1 + 1j) / 2, 0], [0, 0, 0, 1]],
    dtype=np.complex128,
)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)


@dataclass(frozen=True)
class InvariantPair:
    m1: complex
    m2: float

    def distance(self, other: "InvariantPair") -> float:
        return abs(self.m1 - other.m1) ** 2 + abs(self.m2 - other.m2) ** 2


def raw_invariants(U: np.ndarray) -> tuple[complex, complex]:
    """Invariant formulas applied to any invertible 4x4 matrix.

    These are rational in the entries of ``U`` (no conjugation), which the
    optimizer relies on for exact gradients. For unitary input they are the
    Makhlin invariants and m2 is real.
    """
    M = MAGIC.conj().T @ U @ MAGIC
    m = M.T @ M
    tr = np.trace(m)
    det = np.linalg.det(U)
    return tr * tr / (16 * det), (tr * tr - np.trace(m @ m)) / (4 * det)


def _check_gate(U: np.ndarray, tol: float = UNITARY_TOL) -> np.ndarray:
    U = np.asarray(U, dtype=np.complex128)
    if U.shape != (4, 4):
        raise DomainError(f"two-qubit gate must be 4x4, got {U.shape}")
    if np.max(np.abs(U.conj().T @ U - np.eye(4))) > tol:
        raise DomainError("gate is not unitary within tolerance")
    return U


def makhlin_invariants(U: np.ndarray) -> InvariantPair:
    """``(m1, m2)`` with ``m1 = tr(m)^2 / (16 det U)``, ``m2 = (tr(m)^2 - tr(m^2)) / (4 det U)``,
    ``m = M^T M`` and ``M`` the gate in the magic basis.

    >>> makhlin_invariants(CNOT)
    InvariantPair(m1=0j, m2=1.0)
    """
    U = _check_gate(U)
    m1, m2 = raw_invariants(U)
    return InvariantPair(complex(np.round(m1, 14)) + 0j, float(np.round(m2.real, 14)) + 0.0)


def block_invariants(block: np.ndarray) -> InvariantPair:
    """Invariants of a nearly unitary logical block, after replacing it by its polar factor.

    Raises DomainError when the block is too far from unitary for the invariants to
    be meaningful.
    """
    block = np.asarray(block, dtype=np.complex128)
    resid = np.max(np.abs(block.conj().T @ block - np.eye(4)))
    if resid > POLAR_TRUST:
        raise DomainError(f"block deviates from unitarity by {resid:.2e}; invariants untrusted")
    u, _ = polar(block)
    return makhlin_invariants(u)


def locally_equivalent(U: np.ndarray, V: np.ndarray, tol: float = 1e-8) -> tuple[bool, float]:
    dist = makhlin_invariants(U).distance(makhlin_invariants(V))
    return dist < tol, dist


def _to_su4(U: np.ndarray) -> np.ndarray:
    return U / np.linalg.det(U) ** 0.25


def _magic_kak(U: np.ndarray, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``Q^dag U Q = O1 diag(d) O2`` with O1, O2 in SO(4), for U in SU(4)."""
    Um = MAGIC.conj().T @ U @ MAGIC
    m = Um.T @ Um
    # Re(m) and Im(m) are commuting real symmetric matrices; a generic
    # combination has exactly their joint eigenspaces.
    for _ in range(10):
        c = rng.uniform(0.2, 1.0)
        _, P = np.linalg.eigh(c * m.real + (1 - c) * m.imag)
        D = np.diag(P.T @ m @ P)
        if np.max(np.abs(P.T @ m @ P - np.diag(D))) < 1e-10:
            break
    if np.linalg.det(P) < 0:
        P[:, 0] = -P[:, 0]
    d = np.sqrt(D)
    O1 = (Um @ P / d).real
    if np.linalg.det(O1) < 0:
        d[0] = -d[0]
        O1[:, 0] = -O1[:, 0]
    return O1, d, P.T


def _split_local(X: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Best ``A x B`` approximation of a 4x4 matrix; returns (A, B, second singular value)."""
    R = X.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    u, s, vh = np.linalg.svd(R)
    A = np.sqrt(s[0]) * u[:, 0].reshape(2, 2)
    B = np.sqrt(s[0]) * vh[0].reshape(2, 2)
    return _nearest_unitary(A), _nearest_unitary(B), float(s[1])


def _nearest_unitary(A: np.ndarray) -> np.ndarray:
    u, _, vh = np.linalg.svd(A)
    return u @ vh


def _compose(U, A1, A2, B1, B2):
    return np.kron(A1, A2) @ U @ np.kron(B1, B2)


def _kak_seed(U: np.ndarray, V: np.ndarray, rng: np.random.Generator):
    Us, Vs = _to_su4(U), _to_su4(V)
    O1u, du, O2u = _magic_kak(Us, rng)
    O1v, dv, O2v = _magic_kak(Vs, rng)
    best = None
    for perm in itertools.permutations(range(4)):
        Pi = np.eye(4)[:, perm]
        if np.linalg.det(Pi) < 0:
            # a sign flip keeps Pi in SO(4) and commutes with the diagonal
            Pi[:, 0] = -Pi[:, 0]
        for k in range(4):
            # dv = i^k Pi S du Pi^T, i.e. dv[perm[j]] = i^k s_j du[j]
            ratio = dv[list(perm)] / (1j**k * du)
            signs = np.sign(ratio.real)
            err = np.max(np.abs(ratio - signs))
            if np.prod(signs) < 0:
                continue
            if best is None or err < best[0]:
                best = (err, Pi, np.diag(signs))
    if best is None:
        return None
    _, Pi, S = best
    L = O1v @ Pi @ S @ O1u.T
    R = O2u.T @ Pi.T @ O2v
    A1, A2, _ = _split_local(MAGIC @ L @ MAGIC.conj().T)
    B1, B2, _ = _split_local(MAGIC @ R @ MAGIC.conj().T)
    return A1, A2, B1, B2


def _polish(U, V, A1, A2, B1, B2):
    gens = [np.eye(2), *(np.array(p, dtype=np.complex128) for p in ([[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]))]
    base = (A1, A2, B1, B2)

    def unpack(x):
        mats = []
        for q in range(4):
            h = sum(x[4 * q + r] * gens[r] for r in range(4))
            mats.append(base[q] @ expm(1j * h))
        return mats

    def resid(x):
        X = _compose(U, *unpack(x))
        ov = np.trace(V.conj().T @ X)
        diff = (X * (abs(ov) / ov) - V).ravel()
        return np.concatenate([diff.real, diff.imag])

    res = least_squares(resid, np.zeros(16), xtol=1e-15, ftol=1e-15, gtol=1e-15)
    return unpack(res.x)


def extract_local_corrections(U_achieved: np.ndarray, U_target: np.ndarray, tol: float = 1e-8, seed: int = 0):
    """Find one-qubit gates with ``(A1 x A2) U_achieved (B1 x B2) = e^{i phi} U_target``.

    Returns ``(A1, A2, B1, B2, residual)`` where residual is the entrywise,
    phase-aligned distance to the target. Corrections on one side only are tried
    first, then a canonical (KAK) decomposition of both gates, finished by a local
    16-parameter refinement when needed.
    """
    U = _check_gate(U_achieved, 1e-6)
    V = _check_gate(U_target, 1e-6)
    ok, dist = locally_equivalent(U, V, tol)
    if not ok:
        raise NoSolutionError(f"gates are not locally equivalent (invariant distance {dist:.3e})")
    eye = np.eye(2, dtype=np.complex128)
    candidates = []
    A1, A2, s = _split_local(V @ U.conj().T)
    if s < 1e-8:
        candidates.append((A1, A2, eye, eye))
    B1, B2, s = _split_local(U.conj().T @ V)
    if s < 1e-8:
        candidates.append((eye, eye, B1, B2))
    rng = np.random.default_rng(seed)
    if not candidates:
        seed_locals = _kak_seed(U, V, rng)
        if seed_locals is not None:
            candidates.append(seed_locals)
        candidates.append((eye, eye, eye, eye))

    best = None
    for cand in candidates:
        r = phase_distance(_compose(U, *cand), V)
        if r > 1e-12:
            cand = tuple(_polish(U, V, *cand))
            r = phase_distance(_compose(U, *cand), V)
        if best is None or r < best[-1]:
            best = (*cand, r)
        if r < 1e-12:
            break
    return best
