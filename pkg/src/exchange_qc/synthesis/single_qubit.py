"""Exchange-only one-qubit gates on a single three-spin block."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..encoding import BLOCK_A, bloch_axis, logical_action, logical_basis
from ..errors import DomainError
from ..spin_core import phase_distance
from .objective import SynthesisObjective
from .optimize import minimize_multistart
from .sequence import Layout, PulseSequence, canonical_tau, sequence_unitary

FLAVORS = ("serial-4-nearest", "serial-3-anypair", "parallel-3")

_NEAREST_4 = (((0, 1),), ((1, 2),), ((0, 1),), ((1, 2),))


def anypair_patterns() -> list[tuple]:
    """Three-pulse orders with no pair repeated back to back, (0,1),(1,2),(0,2) first.

    A fixed order of three coplanar axes does not reach every rotation, so the
    any-pair flavor is free to pick the order per target.
    """
    pairs = [(0, 1), (1, 2), (0, 2)]
    out = [p for p in itertools.product(pairs, repeat=3) if p[0] != p[1] and p[1] != p[2]]
    out.sort(key=lambda p: p != tuple(pairs))
    return [tuple((q,) for q in p) for p in out]


@dataclass
class SingleQubitResult:
    sequence: PulseSequence
    residual: float
    success: bool
    restarts: int = 0

    @property
    def times(self) -> np.ndarray:
        return self.sequence.times


def logical_gate(seq: PulseSequence) -> np.ndarray:
    """2x2 logical action of a one-block sequence, by direct 8x8 multiplication."""
    return logical_action(sequence_unitary(seq), logical_basis()).inside_block


def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def z_rotation_time(theta: float) -> float:
    """Duration on the block's first pair giving a logical z-rotation by ``theta``."""
    return canonical_tau(theta / (2 * np.pi))


def zxz_angles(U: np.ndarray) -> tuple[float, float, float]:
    """``(alpha, beta, gamma)`` with ``U ~ Rz(alpha) Rx(beta) Rz(gamma)`` up to phase, beta in [0, pi]."""
    U = np.asarray(U, dtype=np.complex128)
    V = U / np.sqrt(np.linalg.det(U))
    # ZYZ first: V = Rz(a) Ry(b) Rz(c)
    b = 2 * np.arctan2(abs(V[1, 0]), abs(V[0, 0]))
    if abs(V[0, 0]) > 1e-12 and abs(V[1, 0]) > 1e-12:
        s = -2 * np.angle(V[0, 0])
        d = 2 * np.angle(V[1, 0])
    elif abs(V[1, 0]) <= 1e-12:
        s, d = -2 * np.angle(V[0, 0]), 0.0
    else:
        s, d = 0.0, 2 * np.angle(V[1, 0])
    a, c = (s + d) / 2, (s - d) / 2
    # Ry(b) = Rz(pi/2) Rx(b) Rz(-pi/2)
    return a + np.pi / 2, b, c - np.pi / 2


def _parallel_euler(target: np.ndarray) -> PulseSequence:
    alpha, beta, gamma = zxz_angles(target)
    # Rz(a) Rx(b) Rz(g) = Rz(a + pi) Rx(-b) Rz(g - pi), so the middle step rotates by -b <= 0.
    alpha, theta, gamma = alpha + np.pi, -beta, gamma - np.pi
    axis, rate = bloch_axis((1, 2))
    # t01 * z + t12 * axis must point along x: cancel the z component
    t12 = theta / (rate * axis[0])
    t01 = -t12 * axis[2]
    steps = (
        ((0, 1, z_rotation_time(gamma)),),
        ((0, 1, t01), (1, 2, t12)),
        ((0, 1, z_rotation_time(alpha)),),
    )
    return PulseSequence("parallel-1d", 3, steps)


def decompose_single_qubit(target: np.ndarray, flavor: str = "serial-4-nearest", restarts: int = 64,
                           seed: int = 0, tol: float = 1e-8) -> SingleQubitResult:
    """Exchange durations realising a logical one-qubit gate (up to global phase).

    ``serial-4-nearest`` uses pairs (0,1),(1,2),(0,1),(1,2); ``serial-3-anypair`` uses three
    pulses on any pairs, trying (0,1),(1,2),(0,2) first; both are solved numerically. ``parallel-3`` is the z-x-z Euler
    construction, the x rotation coming from switching on (0,1) and (1,2) together.
    The residual is always recomputed from the full 8x8 evolution.
    """
    target = np.asarray(target, dtype=np.complex128)
    if target.shape != (2, 2) or np.max(np.abs(target.conj().T @ target - np.eye(2))) > 1e-10:
        raise DomainError("target must be a 2x2 unitary")
    if flavor not in FLAVORS:
        raise DomainError(f"unknown flavor {flavor!r}; expected one of {FLAVORS}")
    if flavor == "parallel-3":
        seq = _parallel_euler(target)
        resid = phase_distance(logical_gate(seq), target)
        return SingleQubitResult(seq, resid, resid < tol, 0)

    obj = SynthesisObjective(target=target, equivalence="exact", blocks=(BLOCK_A,))
    if flavor == "serial-4-nearest":
        candidates, layout, per = [_NEAREST_4], Layout.parse("line", 3), restarts
    else:
        candidates, layout = anypair_patterns(), Layout.parse("complete", 3)
        per = max(1, restarts // 4)
    used = 0
    best = None
    for pattern in candidates:
        rep = minimize_multistart(obj, pattern, restarts=per, seed=seed, f_tol=1e-22,
                                  initial=np.zeros(len(pattern)))
        used += rep.restarts
        seq = PulseSequence.from_pattern("serial", 3, pattern, rep.times, layout)
        resid = phase_distance(logical_gate(seq), target)
        if best is None or resid < best.residual:
            best = SingleQubitResult(seq, resid, resid < tol, used)
        if best.success:
            break
    best.restarts = used
    return best


def _short_serial(target: np.ndarray, length: int, restarts: int, seed: int, tol: float) -> SingleQubitResult:
    obj = SynthesisObjective(target=target, equivalence="exact", blocks=(BLOCK_A,))
    pairs = ((0, 1), (1, 2))
    best, used = None, 0
    for first in range(2):
        pattern = tuple((pairs[(first + k) % 2],) for k in range(length))
        rep = minimize_multistart(obj, pattern, restarts=restarts, seed=seed, f_tol=1e-22,
                                  initial=np.zeros(length))
        used += rep.restarts
        seq = PulseSequence.from_pattern("serial", 3, pattern, rep.times)
        resid = phase_distance(logical_gate(seq), target)
        if best is None or resid < best.residual:
            best = SingleQubitResult(seq, resid, resid < tol, used)
        if best.success:
            break
    best.restarts = used
    return best


def synthesize_single_qubit(target: np.ndarray, mode: str = "serial", max_steps: int = 4, restarts: int = 64,
                            seed: int = 0, tol: float = 1e-8) -> SingleQubitResult:
    """Pick a construction that fits ``max_steps`` steps in ``mode``.

    Fewer than four serial (or three parallel) steps do not reach every
    rotation; the shorter searches simply report failure when they miss.
    """
    if max_steps < 1:
        raise DomainError("max_steps must be >= 1")
    if mode == "serial" or max_steps < 3:
        if max_steps >= 4:
            res = decompose_single_qubit(target, "serial-4-nearest", restarts, seed, tol)
        else:
            # nearest-neighbour alternation only
            res = _short_serial(target, max_steps, restarts, seed, tol)
        if mode != "serial":
            res.sequence = PulseSequence(mode, 3, res.sequence.steps,
                                         Layout.parse("grid:1x3", 3) if mode == "parallel-2d" else None)
        return res
    res = decompose_single_qubit(target, "parallel-3", restarts, seed, tol)
    if mode == "parallel-2d":
        res.sequence = PulseSequence(mode, 3, res.sequence.steps, Layout.parse("grid:1x3", 3))
    return res
