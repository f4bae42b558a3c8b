"""Named logical targets understood by the command line."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import DomainError
from .gate_equivalence import CNOT, CZ, HADAMARD, PAULI_X, SQRT_SWAP, SWAP
from .synthesis.single_qubit import rx, rz

TWO_QUBIT = {"cnot": CNOT, "cz": CZ, "swap-logical": SWAP, "sqrt-swap": SQRT_SWAP}
ONE_QUBIT = {"h": HADAMARD, "x": PAULI_X, "identity": np.eye(2, dtype=np.complex128)}


def load_matrix(path: str | Path) -> np.ndarray:
    """Square complex matrix from ``.npy`` or whitespace text (``1+0j`` style entries)."""
    path = Path(path)
    try:
        M = np.load(path) if path.suffix == ".npy" else np.loadtxt(path, dtype=np.complex128, ndmin=2)
    except (OSError, ValueError) as exc:
        raise DomainError(f"cannot read matrix from {path}: {exc}") from exc
    M = np.asarray(M, dtype=np.complex128)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DomainError(f"{path} does not hold a square matrix")
    return M


def parse_target(text: str) -> np.ndarray:
    """``cnot``, ``cz``, ``swap-logical``, ``sqrt-swap``, ``h``, ``x``, ``identity``,
    ``rz:THETA``, ``rx:THETA`` or ``file:PATH``."""
    key = text.strip().lower()
    if key in TWO_QUBIT:
        return TWO_QUBIT[key].copy()
    if key in ONE_QUBIT:
        return ONE_QUBIT[key].copy()
    if key.startswith(("rz:", "rx:")):
        try:
            theta = float(key[3:])
        except ValueError:
            raise DomainError(f"bad rotation angle in {text!r}") from None
        if not np.isfinite(theta):
            raise DomainError("rotation angle must be finite")
        return rz(theta) if key.startswith("rz") else rx(theta)
    if text.startswith("file:"):
        M = load_matrix(text[5:])
        if M.shape not in ((2, 2), (4, 4)):
            raise DomainError("target matrix must be 2x2 or 4x4")
        if np.max(np.abs(M.conj().T @ M - np.eye(M.shape[0]))) > 1e-8:
            raise DomainError("target matrix is not unitary")
        return M
    raise DomainError(f"unknown target {text!r}")
