"""Synthesis objective: invariant mismatch (or exact mismatch) plus a leakage penalty.

The objective is written as a sum of squares ``f = |r|^2`` over a real residual
vector ``r(tau)``. Its Jacobian is exact, using
``dU/dtau_k = U_N ... (dU_k/dtau_k) ... U_1``, so ``grad f = 2 J^T r`` and the same
pieces drive a Gauss-Newton polish.

Evolution is computed inside the relevant total-spin sectors only (9x9 for the
six-spin S=1, Sz=+1 sector), in a basis whose leading columns are the logical
states; the logical block is then the top-left corner and the leakage is the
block below it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from ..encoding import TWO_BLOCK, CodeBlock, logical_basis
from ..errors import DomainError
from ..gate_equivalence import CNOT, MAGIC, makhlin_invariants, raw_invariants
from ..sectors import sector_basis
from ..spin_core import SpinRegister, swap_operator

Pattern = Sequence[Sequence[tuple[int, int]]]

DEFAULT_LEAKAGE_WEIGHT = 1.0


def _complement(sector_cols: np.ndarray, logical: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the part of a sector orthogonal to the logical states."""
    rest = sector_cols - logical @ (logical.conj().T @ sector_cols)
    vecs: list[np.ndarray] = []
    for k in range(rest.shape[1]):
        v = rest[:, k].copy()
        for _ in range(2):
            for q in vecs:
                v -= q * np.vdot(q, v)
        nrm = np.linalg.norm(v)
        if nrm > 1e-8:
            vecs.append(v / nrm)
    if not vecs:
        return np.zeros((sector_cols.shape[0], 0), dtype=np.complex128)
    return np.array(vecs).T


@dataclass(frozen=True, eq=False)
class SectorModel:
    """Exchange generators restricted to one sector, logical states first."""

    label: str
    logical_dim: int
    basis: np.ndarray
    swaps: dict

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


def build_sector_model(blocks: Sequence[CodeBlock], n: int, S, Sz, gauge: str, label: str) -> SectorModel:
    logical = logical_basis(blocks, n, gauge=gauge).vectors
    sector = sector_basis(n, S, Sz).columns
    if np.linalg.norm(logical - sector @ (sector.conj().T @ logical)) > 1e-10:
        raise DomainError(f"logical states do not lie in sector {label}")
    basis = np.hstack([logical, _complement(sector, logical)])
    reg = SpinRegister(n)
    swaps = {}
    for i in range(n):
        for j in range(i + 1, n):
            w = basis.conj().T @ swap_operator(reg, i, j) @ basis
            swaps[(i, j)] = 0.5 * (w + w.conj().T)
    return SectorModel(label, logical.shape[1], basis, swaps)


@dataclass(frozen=True, eq=False)
class SynthesisObjective:
    """What a pulse sequence should implement on the logical qubits.

    ``equivalence`` is ``"local"`` (match invariants, i.e. the target up to one-qubit
    gates) or ``"exact"`` (match the target up to a global phase). ``subsystem=True``
    additionally requires the same logical gate inside the six-spin S=0 sector,
    as needed when each block may sit in either of its Sz = +-1/2 states.
    """

    target: np.ndarray = field(default_factory=lambda: CNOT.copy())
    equivalence: str = "local"
    leakage_weight: float = DEFAULT_LEAKAGE_WEIGHT
    subsystem: bool = False
    consistency_weight: float = 1.0
    blocks: tuple[CodeBlock, ...] = TWO_BLOCK

    def __post_init__(self):
        T = np.asarray(self.target, dtype=np.complex128)
        d = 2 ** len(self.blocks)
        if T.shape != (d, d):
            raise DomainError(f"target must be {d}x{d} for {len(self.blocks)} block(s)")
        if np.max(np.abs(T.conj().T @ T - np.eye(d))) > 1e-10:
            raise DomainError("target is not unitary")
        if self.equivalence not in ("local", "exact"):
            raise DomainError(f"unknown equivalence mode {self.equivalence!r}")
        if self.equivalence == "local" and d != 4:
            raise DomainError("local-equivalence mode needs a two-qubit target")
        if not np.isfinite(self.leakage_weight) or self.leakage_weight < 0:
            raise DomainError("leakage weight must be finite and non-negative")
        if self.subsystem and len(self.blocks) != 2:
            raise DomainError("the subsystem variant is defined for two blocks")
        object.__setattr__(self, "target", T)

    @property
    def n(self) -> int:
        return 3 * len(self.blocks)

    @cached_property
    def models(self) -> tuple[SectorModel, ...]:
        if len(self.blocks) == 1:
            return (build_sector_model(self.blocks, 3, "1/2", "1/2", "up", "S=1/2,Sz=1/2"),)
        models = [build_sector_model(self.blocks, self.n, 1, 1, "up", "S=1,Sz=1")]
        if self.subsystem:
            models.append(build_sector_model(self.blocks, self.n, 0, 0, "singlet", "S=0,Sz=0"))
        return tuple(models)

    @cached_property
    def target_invariants(self) -> tuple[complex, complex]:
        inv = makhlin_invariants(self.target)
        return inv.m1, complex(inv.m2)

    def describe(self) -> str:
        parts = [f"{self.equivalence} match to {self.target.shape[0]}x{self.target.shape[0]} target",
                 f"leakage weight {self.leakage_weight:g}"]
        if self.subsystem:
            parts.append(f"S=0 sector included (consistency weight {self.consistency_weight:g})")
        return "; ".join(parts)


# ---------------------------------------------------------------------------
# evolution inside a sector

def _step_and_derivs(model: SectorModel, step: Sequence[tuple[int, int]], taus: Sequence[float]):
    """Step unitary ``exp(i 2pi sum tau_p S_i.S_j)`` and its derivative in each tau_p."""
    d = model.dim
    eye = np.eye(d)
    if len(step) == 1:
        (i, j), tau = step[0], taus[0]
        W = model.swaps[(min(i, j), max(i, j))]
        c, s = np.cos(np.pi * tau), np.sin(np.pi * tau)
        ph = np.exp(-0.5j * np.pi * tau)
        inner = c * eye + 1j * s * W
        U = ph * inner
        dU = ph * (-0.5j * np.pi * inner + np.pi * (-s * eye + 1j * c * W))
        return U, [dU]
    hs = [0.5 * model.swaps[(min(i, j), max(i, j))] - 0.25 * eye for i, j in step]
    H = sum(t * h for t, h in zip(taus, hs))
    w, V = np.linalg.eigh(H)
    scale = 2 * np.pi
    e = np.exp(1j * scale * w)
    U = (V * e) @ V.conj().T
    # Daleckii-Krein divided differences for the Frechet derivative of exp(i*scale*H)
    dw = w[:, None] - w[None, :]
    close = np.abs(dw) < 1e-10
    L = np.where(close, 1j * scale * e[:, None], (e[:, None] - e[None, :]) / np.where(close, 1.0, dw))
    dUs = [V @ (L * (V.conj().T @ h @ V)) @ V.conj().T for h in hs]
    return U, dUs


def sector_evolution(model: SectorModel, pattern: Pattern, times: Sequence[float], with_derivs: bool = True):
    """Sector unitary and, optionally, ``dU/dtau`` restricted to the logical columns.

    Returns ``(U, dU)`` where ``dU`` has shape ``(n_params, dim, logical_dim)``.
    """
    d, q = model.dim, model.logical_dim
    times = np.asarray(times, dtype=float)
    steps, derivs = [], []
    k = 0
    for step in pattern:
        U_k, dU_k = _step_and_derivs(model, step, times[k:k + len(step)])
        steps.append(U_k)
        derivs.append(dU_k)
        k += len(step)
    if k != times.size:
        raise DomainError(f"pattern has {k} couplings but {times.size} durations were given")

    prefix = [np.eye(d, dtype=np.complex128)[:, :q]]
    for U_k in steps:
        prefix.append(U_k @ prefix[-1])
    U_full = np.eye(d, dtype=np.complex128)
    for U_k in steps:
        U_full = U_k @ U_full
    if not with_derivs:
        return U_full, None
    out = np.empty((times.size, d, q), dtype=np.complex128)
    suffix = np.eye(d, dtype=np.complex128)
    a = times.size
    for idx in range(len(steps) - 1, -1, -1):
        for dU in reversed(derivs[idx]):
            a -= 1
            out[a] = suffix @ (dU @ prefix[idx])
        suffix = suffix @ steps[idx]
    return U_full, out


# ---------------------------------------------------------------------------
# residuals

def _cplx(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z).ravel()
    return np.concatenate([z.real, z.imag])


def _cplx_jac(dz: np.ndarray) -> np.ndarray:
    """Rows are real/imag parts of the flattened complex quantity, columns are parameters."""
    dz = dz.reshape(dz.shape[0], -1).T
    return np.vstack([dz.real, dz.imag])


def _invariant_terms(B: np.ndarray, dB: np.ndarray, target: tuple[complex, complex]):
    M = MAGIC.conj().T @ B @ MAGIC
    m = M.T @ M
    t1 = np.trace(m)
    t2 = np.trace(m @ m)
    det = np.linalg.det(B)
    m1, m2 = raw_invariants(B)
    Binv = np.linalg.inv(B)
    A1 = 2 * MAGIC @ M.T @ MAGIC.conj().T  # d tr(m) = tr(A1 dB)
    A2 = 4 * MAGIC @ m @ M.T @ MAGIC.conj().T  # d tr(m^2) = tr(A2 dB)
    G1 = 2 * t1 * A1 / (16 * det) - m1 * Binv
    G2 = (2 * t1 * A1 - A2) / (4 * det) - m2 * Binv
    d1 = np.einsum("ij,aji->a", G1, dB)
    d2 = np.einsum("ij,aji->a", G2, dB)
    e = np.array([m1 - target[0], m2 - target[1]])
    return _cplx(e), _cplx_jac(np.stack([d1, d2], axis=1))


def _aligned_terms(X: np.ndarray, dX: np.ndarray, Y: np.ndarray, dY: np.ndarray | None = None):
    """Residual ``X conj(c) - Y`` with ``c = tr(Y^dag X)/|tr(Y^dag X)|`` and its derivatives."""
    z = np.trace(Y.conj().T @ X)
    az = abs(z)
    if az < 1e-300:
        z, az = 1.0 + 0j, 1.0
    c = z / az
    dz = np.einsum("ij,aij->a", Y.conj(), dX)
    if dY is not None:
        dz = dz + np.einsum("aij,ij->a", dY.conj(), X)
    dc = dz / az - z * np.real(np.conj(z) * dz) / az**3
    r = X * np.conj(c) - Y
    dr = dX * np.conj(c) + X[None] * np.conj(dc)[:, None, None]
    if dY is not None:
        dr = dr - dY
    return _cplx(r), _cplx_jac(dr)


@dataclass
class Evaluation:
    residual: np.ndarray
    jacobian: np.ndarray | None
    leakage: float
    blocks: list

    @property
    def f(self) -> float:
        return float(self.residual @ self.residual)

    @property
    def gradient(self) -> np.ndarray:
        return 2.0 * self.jacobian.T @ self.residual


def evaluate(obj: SynthesisObjective, pattern: Pattern, times: Sequence[float], with_jacobian: bool = True) -> Evaluation:
    """Residual vector, Jacobian and leakage for one set of durations."""
    res, jac, blocks = [], [], []
    leak2 = 0.0
    sqrt_lam = np.sqrt(obj.leakage_weight)
    per_sector = []
    for model in obj.models:
        q = model.logical_dim
        U, dU = sector_evolution(model, pattern, times, with_jacobian)
        B, L = U[:q, :q], U[q:, :q]
        dB = dU[:, :q, :] if with_jacobian else None
        blocks.append(B)
        leak2 += float(np.sum(np.abs(L) ** 2))
        per_sector.append((B, dB))
        if obj.equivalence == "local":
            if with_jacobian:
                r, J = _invariant_terms(B, dB, obj.target_invariants)
            else:
                m1, m2 = raw_invariants(B)
                r, J = _cplx(np.array([m1 - obj.target_invariants[0], m2 - obj.target_invariants[1]])), None
        else:
            if with_jacobian:
                r, J = _aligned_terms(B, dB, obj.target)
            else:
                z = np.trace(obj.target.conj().T @ B)
                r, J = _cplx(B * np.conj(z / max(abs(z), 1e-300)) - obj.target), None
        res.append(r)
        jac.append(J)
        if L.size:
            res.append(sqrt_lam * _cplx(L))
            jac.append(sqrt_lam * _cplx_jac(dU[:, q:, :]) if with_jacobian else None)
    if obj.subsystem:
        (B1, dB1), (B0, dB0) = per_sector
        sqrt_mu = np.sqrt(obj.consistency_weight)
        if with_jacobian:
            r, J = _aligned_terms(B1, dB1, B0, dB0)
            jac.append(sqrt_mu * J)
        else:
            z = np.trace(B0.conj().T @ B1)
            r = _cplx(B1 * np.conj(z / max(abs(z), 1e-300)) - B0)
        res.append(sqrt_mu * r)
    r = np.concatenate(res)
    J = np.vstack(jac) if with_jacobian else None
    return Evaluation(r, J, float(np.sqrt(leak2)), blocks)


def objective_value(obj: SynthesisObjective, pattern: Pattern, times: Sequence[float]) -> float:
    return evaluate(obj, pattern, times, with_jacobian=False).f


def objective_and_gradient(times: np.ndarray, obj: SynthesisObjective, pattern: Pattern) -> tuple[float, np.ndarray]:
    """``(f, grad f)``; argument order suits ``scipy.optimize.minimize(jac=True)``."""
    ev = evaluate(obj, pattern, times)
    f = ev.f
    if not np.isfinite(f):
        return np.inf, np.zeros(len(times))
    return f, ev.gradient


def evaluate_objective(seq, obj: SynthesisObjective) -> tuple[float, float]:
    """``(f, leakage)`` of a :class:`PulseSequence` under ``obj``."""
    _check_register(seq, obj)
    ev = evaluate(obj, seq.pattern, seq.times, with_jacobian=False)
    return ev.f, ev.leakage


def analytic_gradient(seq, obj: SynthesisObjective) -> np.ndarray:
    """Exact ``df/dtau`` for every coupling of ``seq``, in step order."""
    _check_register(seq, obj)
    return evaluate(obj, seq.pattern, seq.times).gradient


def _check_register(seq, obj: SynthesisObjective) -> None:
    if seq.n != obj.n:
        raise DomainError(f"sequence acts on {seq.n} spins, objective expects {obj.n}")
