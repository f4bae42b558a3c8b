"""Independent re-verification of a schedule.

Everything here starts from the durations alone: the full ``2**n`` unitary is
rebuilt by multiplying step unitaries, and nothing from the optimiser is reused.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .encoding import BLOCK_A, TWO_BLOCK, logical_action, logical_basis
from .errors import DomainError, NoSolutionError
from .gate_equivalence import extract_local_corrections, raw_invariants
from .sectors import sector_basis
from .spin_core import phase_distance
from .synthesis.objective import DEFAULT_LEAKAGE_WEIGHT
from .synthesis.sequence import PulseSequence, sequence_unitary

DEFAULT_THRESHOLDS = {"f": 1e-12, "leakage": 1e-8, "residual": 6e-5, "off_block": 1e-8, "structure": 1e-10}
STRUCTURE_CHECKS = ("unitary", "sector_conserved")


@dataclass
class VerificationReport:
    f: float
    leakage: float
    residual: float
    off_block: float
    sector_leak: float
    unitarity: float
    sector: str
    sector_dim: int
    logical_dim: int
    thresholds: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    @property
    def structure_ok(self) -> bool:
        return all(self.checks[k] for k in STRUCTURE_CHECKS)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def _off_block_norm(U: np.ndarray, sector_cols: np.ndarray, logical: np.ndarray) -> float:
    """Frobenius norm of the logical/complement cross terms of U inside the sector."""
    W = sector_cols.conj().T @ U @ sector_cols
    P = sector_cols.conj().T @ logical
    Pl = P @ P.conj().T
    Pc = np.eye(W.shape[0]) - Pl
    return float(np.linalg.norm(Pc @ W @ Pl) + np.linalg.norm(Pl @ W @ Pc))


def _nearest_unitary(B: np.ndarray) -> np.ndarray:
    u, _, vh = np.linalg.svd(B)
    return u @ vh


def verify_sequence(seq: PulseSequence, target: np.ndarray, thresholds: dict | None = None,
                    leakage_weight: float = DEFAULT_LEAKAGE_WEIGHT) -> VerificationReport:
    """Check ``seq`` against a logical ``target`` (2x2 on one block, 4x4 on two).

    Two-qubit targets are judged up to one-qubit gates: ``f`` is the invariant
    mismatch plus the leakage penalty and ``residual`` is the entrywise distance
    after local-correction extraction. One-qubit targets are judged exactly.
    """
    target = np.asarray(target, dtype=np.complex128)
    th = dict(DEFAULT_THRESHOLDS)
    if target.shape == (2, 2):
        th["residual"] = 1e-8
    th.update(thresholds or {})
    if target.shape == (4, 4):
        blocks, S, Sz = TWO_BLOCK, 1, 1
    elif target.shape == (2, 2):
        blocks, S, Sz = (BLOCK_A,), "1/2", "1/2"
    else:
        raise DomainError("target must be 2x2 or 4x4")
    if seq.n != 3 * len(blocks):
        raise DomainError(f"a {target.shape[0]}x{target.shape[0]} target needs {3 * len(blocks)} spins, schedule has {seq.n}")

    U = sequence_unitary(seq)
    basis = logical_basis(blocks, seq.n)
    dec = logical_action(U, basis)
    B = dec.inside_block
    leak = dec.leakage_norm
    if target.shape == (4, 4):
        m1, m2 = raw_invariants(B)
        t1, t2 = raw_invariants(target)
        f = abs(m1 - t1) ** 2 + abs(m2 - t2) ** 2 + leakage_weight * leak**2
        try:
            A1, A2, B1, B2, _ = extract_local_corrections(_nearest_unitary(B), target, tol=np.inf)
            # judged on the raw block, not its unitary part
            residual = phase_distance(np.kron(A1, A2) @ B @ np.kron(B1, B2), target)
        except (NoSolutionError, DomainError):
            residual = np.inf
    else:
        z = np.trace(target.conj().T @ B)
        c = z / abs(z) if abs(z) > 0 else 1.0
        f = float(np.linalg.norm(B * np.conj(c) - target) ** 2 + leakage_weight * leak**2)
        residual = phase_distance(B, target)
    sec = sector_basis(seq.n, S, Sz)
    off = _off_block_norm(U, sec.columns, basis.vectors)
    C = sec.columns
    sector_leak = float(np.linalg.norm(U @ C - C @ (C.conj().T @ U @ C)))
    unitarity = float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))
    checks = {
        "unitary": unitarity < th["structure"],
        "sector_conserved": sector_leak < th["structure"],
        "f": f < th["f"],
        "leakage": leak < th["leakage"],
        "residual": residual < th["residual"],
        "off_block": off < th["off_block"],
    }
    checks = {k: bool(v) for k, v in checks.items()}
    return VerificationReport(float(f), float(leak), float(residual), off, sector_leak, unitarity,
                              f"S={S},Sz={Sz}", sec.dim, basis.dim, th, checks)
