"""Dense spin-1/2 operators, exchange Hamiltonians and exchange-pulse unitaries.

Conventions
-----------
* Sites are 0-based. Site 0 is the most significant bit of a basis index.
* A site in ``|up>`` contributes bit 0, ``|down>`` bit 1, so ``|up ... up>`` is index 0.
* Spin operators are S = sigma / 2 (hbar = 1).
* A pulse of dimensionless duration ``tau`` on pair (i, j) is
  ``U(tau) = exp(i * 2*pi * tau * S_i . S_j)``; ``tau = 1/2`` is a SWAP up to a
  global phase and ``tau -> tau + 1`` only changes the global phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, InvalidPairError, InvalidStepError

MAX_SPINS = 12
UNITARY_TOL = 1e-12
HERMITIAN_TOL = 1e-10

_SX = np.array([[0, 1], [1, 0]], dtype=np.complex128) / 2
_SY = np.array([[0, -1j], [1j, 0]], dtype=np.complex128) / 2
_SZ = np.array([[1, 0], [0, -1]], dtype=np.complex128) / 2

UP = np.array([1, 0], dtype=np.complex128)
DOWN = np.array([0, 1], dtype=np.complex128)


@dataclass(frozen=True)
class SpinRegister:
    """A line of ``n`` spin-1/2 sites, indexed from 0."""

    n: int

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or not 1 <= self.n <= MAX_SPINS:
            raise DomainError(f"spin count must be an integer in [1, {MAX_SPINS}], got {self.n!r}")

    @property
    def dim(self) -> int:
        return 2**self.n

    def check_site(self, site: int) -> int:
        if not 0 <= site < self.n:
            raise IndexError(f"site {site} out of range for {self.n} spins")
        return int(site)

    def check_pair(self, i: int, j: int) -> tuple[int, int]:
        self.check_site(i)
        self.check_site(j)
        if i == j:
            raise InvalidPairError(f"exchange pair needs two distinct sites, got ({i}, {j})")
        return int(i), int(j)


def _as_register(reg) -> SpinRegister:
    return reg if isinstance(reg, SpinRegister) else SpinRegister(int(reg))


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def kron_all(ops: Iterable[np.ndarray]) -> np.ndarray:
    out = np.ones((1, 1), dtype=np.complex128)
    for op in ops:
        out = np.kron(out, op)
    return out


def product_state(spins: str) -> np.ndarray:
    """Computational basis state from a string such as ``"udu"`` (u = up, d = down)."""
    vecs = {"u": UP, "d": DOWN, "0": UP, "1": DOWN}
    try:
        return kron_all(vecs[c].reshape(2, 1) for c in spins).ravel()
    except KeyError as exc:
        raise DomainError(f"unknown spin label {exc.args[0]!r} in {spins!r}") from None


@lru_cache(maxsize=None)
def _site_ops(n: int, site: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    eye = np.eye(2, dtype=np.complex128)
    ops = []
    for s in (_SX, _SY, _SZ):
        ops.append(_frozen(kron_all(s if k == site else eye for k in range(n))))
    return tuple(ops)


def spin_operators(reg, site: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(Sx, Sy, Sz)`` for one site, embedded in the full ``2**n`` space."""
    reg = _as_register(reg)
    return _site_ops(reg.n, reg.check_site(site))


@lru_cache(maxsize=None)
def _total_ops(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    dim = 2**n
    tot = [np.zeros((dim, dim), dtype=np.complex128) for _ in range(3)]
    for site in range(n):
        for a, op in enumerate(_site_ops(n, site)):
            tot[a] += op
    s2 = sum(t @ t for t in tot)
    return tuple(_frozen(t) for t in (*tot, s2))


def total_spin_operators(reg) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Total ``(Sx, Sy, Sz)`` summed over all sites."""
    return _total_ops(_as_register(reg).n)[:3]


def total_spin_squared(reg) -> np.ndarray:
    """Total ``S^2`` with eigenvalues ``S(S+1)``."""
    return _total_ops(_as_register(reg).n)[3]


@lru_cache(maxsize=None)
def _swap(n: int, i: int, j: int) -> np.ndarray:
    dim = 2**n
    bi, bj = n - 1 - i, n - 1 - j
    idx = np.arange(dim)
    differ = ((idx >> bi) ^ (idx >> bj)) & 1
    swapped = np.where(differ == 1, idx ^ ((1 << bi) | (1 << bj)), idx)
    out = np.zeros((dim, dim), dtype=np.complex128)
    out[swapped, idx] = 1.0
    return _frozen(out)


def swap_operator(reg, i: int, j: int) -> np.ndarray:
    """Permutation matrix exchanging the states of sites ``i`` and ``j``."""
    reg = _as_register(reg)
    i, j = reg.check_pair(i, j)
    return _swap(reg.n, min(i, j), max(i, j))


def exchange_hamiltonian(reg, i: int, j: int) -> np.ndarray:
    """``S_i . S_j`` on the full space (coupling J absorbed into the time unit).

    Uses ``S_i . S_j = SWAP_ij / 2 - 1/4``, which has eigenvalue 1/4 on the pair
    triplet and -3/4 on the pair singlet.
    """
    reg = _as_register(reg)
    swap = swap_operator(reg, i, j)
    return 0.5 * swap - 0.25 * np.eye(reg.dim, dtype=np.complex128)


def _check_tau(tau: float) -> float:
    tau = float(tau)
    if not math.isfinite(tau):
        raise DomainError(f"pulse duration must be finite, got {tau}")
    return tau


def exchange_unitary(reg, i: int, j: int, tau: float) -> np.ndarray:
    """``exp(i 2 pi tau S_i . S_j)`` via the SWAP closed form.

    ``exp(i theta S.S) = exp(-i theta/4) (cos(theta/2) I + i sin(theta/2) SWAP)``.
    """
    reg = _as_register(reg)
    tau = _check_tau(tau)
    swap = swap_operator(reg, i, j)
    theta = 2 * np.pi * tau
    phase = np.exp(-0.25j * theta)
    return phase * (np.cos(theta / 2) * np.eye(reg.dim) + 1j * np.sin(theta / 2) * swap)


def parallel_step_unitary(reg, couplings: Sequence[tuple[int, int, float]]) -> np.ndarray:
    """Unitary of simultaneously switched-on exchanges ``exp(i 2 pi sum_p tau_p S_i.S_j)``.

    Pairs may share sites (1D / 2D parallel operation), in which case the terms do
    not commute and the full generator is exponentiated spectrally.
    """
    reg = _as_register(reg)
    seen = set()
    norm = []
    for i, j, tau in couplings:
        i, j = reg.check_pair(i, j)
        key = (min(i, j), max(i, j))
        if key in seen:
            raise InvalidStepError(f"pair {key} appears twice in one step")
        seen.add(key)
        norm.append((i, j, _check_tau(tau)))
    if not norm:
        return np.eye(reg.dim, dtype=np.complex128)
    if len(norm) == 1:
        return exchange_unitary(reg, *norm[0])
    sites = [s for i, j, _ in norm for s in (i, j)]
    if len(set(sites)) == len(sites):
        # disjoint pairs commute
        out = np.eye(reg.dim, dtype=np.complex128)
        for c in norm:
            out = exchange_unitary(reg, *c) @ out
        return out
    gen = sum(tau * exchange_hamiltonian(reg, i, j) for i, j, tau in norm)
    return matrix_exp_hermitian(gen, 2 * np.pi)


def matrix_exp_hermitian(H: np.ndarray, scale: float) -> np.ndarray:
    """``exp(i * scale * H)`` for Hermitian ``H`` by spectral decomposition."""
    H = np.asarray(H, dtype=np.complex128)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {H.shape}")
    if H.size and np.max(np.abs(H - H.conj().T)) > HERMITIAN_TOL:
        raise DomainError("matrix is not hermitian within tolerance")
    w, v = np.linalg.eigh(0.5 * (H + H.conj().T))
    return (v * np.exp(1j * scale * w)) @ v.conj().T


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def max_abs(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if np.size(a) else 0.0


def is_unitary(U: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    U = np.asarray(U)
    return U.ndim == 2 and U.shape[0] == U.shape[1] and max_abs(U.conj().T @ U - np.eye(U.shape[0])) < tol


def is_hermitian(H: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    H = np.asarray(H)
    return H.ndim == 2 and H.shape[0] == H.shape[1] and max_abs(H - H.conj().T) < tol


def align_phase(U: np.ndarray, V: np.ndarray) -> complex:
    """Phase ``e^{i phi}`` matching V to U at V's largest-magnitude entry."""
    U = np.asarray(U)
    V = np.asarray(V)
    k = np.unravel_index(np.argmax(np.abs(V)), V.shape)
    if abs(U[k]) == 0:
        return 1.0 + 0j
    ratio = U[k] / V[k]
    return ratio / abs(ratio)


def phase_distance(U: np.ndarray, V: np.ndarray) -> float:
    """Entrywise distance ``max |U - e^{i phi} V|`` with phi fixed by :func:`align_phase`."""
    U = np.asarray(U)
    V = np.asarray(V)
    if U.shape != V.shape:
        raise DomainError(f"shape mismatch {U.shape} vs {V.shape}")
    return max_abs(U - align_phase(U, V) * V)
