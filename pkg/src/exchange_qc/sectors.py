"""Total-spin (S, Sz) sectors: bases, block projection and leakage."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterator, Union

import numpy as np

from .errors import DomainError
from .spin_core import SpinRegister, total_spin_squared

EIGEN_GROUP_TOL = 1e-9
ORTHO_TOL = 1e-12

HalfInt = Union[int, float, Fraction, str]


def half_integer(x: HalfInt) -> Fraction:
    """Parse ``1``, ``0.5``, ``"1/2"`` or a Fraction into an exact half-integer."""
    try:
        q = Fraction(x) if not isinstance(x, float) else Fraction(x).limit_denominator(2)
    except (ValueError, ZeroDivisionError):
        raise DomainError(f"not a number: {x!r}") from None
    if isinstance(x, float) and abs(float(q) - x) > 1e-12:
        raise DomainError(f"{x!r} is not a half-integer")
    if (2 * q).denominator != 1:
        raise DomainError(f"{x!r} is not a half-integer")
    return q


def _check_numbers(n: int, S: Fraction, Sz: Fraction | None = None) -> None:
    if n < 1:
        raise DomainError(f"spin count must be positive, got {n}")
    if S < 0 or S > Fraction(n, 2):
        raise DomainError(f"S={S} outside [0, {Fraction(n, 2)}] for n={n}")
    if (2 * S) % 2 != n % 2:
        raise DomainError(f"S={S} has the wrong parity for n={n} spins")
    if Sz is not None and (abs(Sz) > S or (S - Sz).denominator != 1):
        raise DomainError(f"Sz={Sz} is not a projection of S={S}")


def sector_dimension(n: int, S: HalfInt) -> int:
    """Multiplicity of spin-S irreducibles in n spin-1/2 sites.

    ``C(n, n/2 - S) - C(n, n/2 - S - 1)``; this is also the dimension of each fixed-Sz slice.
    """
    S = half_integer(S)
    _check_numbers(n, S)
    k = int(Fraction(n, 2) - S)
    return comb(n, k) - (comb(n, k - 1) if k >= 1 else 0)


def allowed_spins(n: int) -> list[Fraction]:
    """Total-spin values available to n sites, in increasing order."""
    lo = Fraction(n % 2, 2)
    return [lo + k for k in range(int(Fraction(n, 2) - lo) + 1)]


def iter_sectors(n: int) -> Iterator[tuple[Fraction, Fraction]]:
    for S in allowed_spins(n):
        for k in range(int(2 * S) + 1):
            yield S, S - k


@dataclass(frozen=True, eq=False)
class SectorBasis:
    """Orthonormal basis of the (S, Sz) sector of n spins, as columns in the full space."""

    n: int
    S: Fraction
    Sz: Fraction
    columns: np.ndarray

    @property
    def dim(self) -> int:
        return self.columns.shape[1]

    def restrict(self, op: np.ndarray) -> np.ndarray:
        """Matrix of ``op`` within the sector, ``B^dag op B``."""
        return self.columns.conj().T @ op @ self.columns


@dataclass(frozen=True, eq=False)
class BlockDecomposition:
    inside_block: np.ndarray
    leakage_norm: float
    residual_unitarity: float


def _sz_indices(n: int, Sz: Fraction) -> np.ndarray:
    n_down = int(Fraction(n, 2) - Sz)
    idx = np.arange(2**n)
    popcount = np.array([bin(b).count("1") for b in idx])
    return idx[popcount == n_down]


def sector_basis(n: int, S: HalfInt, Sz: HalfInt) -> SectorBasis:
    """Deterministic orthonormal basis of the (S, Sz) sector.

    S^2 is diagonalised inside the Sz slice only to build the projector onto the
    S(S+1) eigenspace; the returned columns come from Gram-Schmidt on the projected
    computational states taken in increasing index order, so they do not depend on
    the eigensolver's arbitrary choice of basis.
    """
    S = half_integer(S)
    Sz = half_integer(Sz)
    _check_numbers(n, S, Sz)
    reg = SpinRegister(n)
    dim = sector_dimension(n, S)
    idx = _sz_indices(n, Sz)
    s2 = total_spin_squared(reg)[np.ix_(idx, idx)].real
    w, v = np.linalg.eigh(s2)
    target = float(S * (S + 1))
    sel = np.abs(w - target) < EIGEN_GROUP_TOL
    if sel.sum() != dim:
        raise DomainError(f"found {sel.sum()} states with S={S}, expected {dim}")
    proj = v[:, sel] @ v[:, sel].T

    vecs: list[np.ndarray] = []
    for k in range(len(idx)):
        cand = proj[:, k].copy()
        for q in vecs:
            cand -= q * (q @ cand)
        for q in vecs:  # second pass keeps orthogonality at machine precision
            cand -= q * (q @ cand)
        nrm = np.linalg.norm(cand)
        if nrm > 1e-8:
            vecs.append(cand / nrm)
        if len(vecs) == dim:
            break
    cols = np.zeros((2**n, dim), dtype=np.complex128)
    cols[idx, :] = np.array(vecs).T
    cols.setflags(write=False)
    return SectorBasis(n, S, Sz, cols)


def _columns(basis) -> np.ndarray:
    cols = basis.columns if isinstance(basis, SectorBasis) else np.asarray(basis, dtype=np.complex128)
    if cols.ndim == 1:
        cols = cols.reshape(-1, 1)
    return cols


def project_to_block(U: np.ndarray, basis) -> BlockDecomposition:
    """Split ``U`` into its action inside a subspace and the part leaking out of it.

    ``basis`` is a :class:`SectorBasis` or a matrix whose orthonormal columns span
    the subspace.
    """
    U = np.asarray(U, dtype=np.complex128)
    B = _columns(basis)
    if U.ndim != 2 or U.shape[0] != U.shape[1] or U.shape[1] != B.shape[0]:
        raise DomainError(f"operator shape {U.shape} does not match subspace of dimension {B.shape[0]}")
    gram = B.conj().T @ B
    if np.max(np.abs(gram - np.eye(B.shape[1]))) > 1e-10:
        raise DomainError("subspace columns are not orthonormal")
    UB = U @ B
    inside = B.conj().T @ UB
    leak = UB - B @ inside
    resid = np.max(np.abs(inside.conj().T @ inside - np.eye(B.shape[1])))
    return BlockDecomposition(inside, float(np.linalg.norm(leak)), float(resid))


def basis_checksum(basis: SectorBasis) -> str:
    """Short deterministic fingerprint of a basis (rounded to 12 decimals)."""
    cols = np.round(basis.columns, 12)
    data = np.ascontiguousarray(np.stack([cols.real + 0.0, cols.imag + 0.0])).tobytes()  # +0.0 drops -0.0
    return hashlib.sha256(data).hexdigest()[:16]
