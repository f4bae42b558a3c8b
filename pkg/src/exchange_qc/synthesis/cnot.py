"""Two-qubit (cNOT-class) synthesis on two three-spin blocks."""

from __future__ import annotations

import itertools
import logging
import time
from dataclasses import replace
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from ..errors import DomainError, NoSolutionError
from ..gate_equivalence import CNOT, extract_local_corrections
from ..spin_core import phase_distance
from .objective import (DEFAULT_LEAKAGE_WEIGHT, Pattern, SynthesisObjective, _aligned_terms, evaluate,
                        sector_evolution)
from .optimize import OptimizationReport, minimize_multistart
from .sequence import MODES, Layout, PulseSequence, default_layout

log = logging.getLogger(__name__)

N_SPINS = 6
# Serial nearest-neighbour cNOT layout; entry k means the pair (k, k+1). Four
# inter-block (2,3) pulses framing intra-block words on (0,1,2) and (3,4,5).
SERIAL_CNOT_19 = (2, 1, 0, 1, 3, 4, 3, 2, 3, 4, 3, 2, 1, 0, 1, 3, 4, 3, 2)
# Pairs switched on every clock cycle in the parallel modes.
PARALLEL_1D_PAIRS = ((1, 2), (2, 3), (3, 4), (4, 5))
DEFAULT_CYCLES = {"serial": 19, "parallel-1d": 8, "parallel-2d": 7}
EXHAUSTIVE_LIMIT = 4096


def nearest_neighbour_pattern(indices: Sequence[int]) -> tuple:
    return tuple(((int(k), int(k) + 1),) for k in indices)


def mirror_pair(pair: tuple[int, int], n: int = N_SPINS) -> tuple[int, int]:
    i, j = pair
    return (n - 1 - max(i, j), n - 1 - min(i, j))


def mirror_reverse(pattern: Pattern, n: int = N_SPINS) -> tuple:
    """Spatially mirrored, time-reversed pattern.

    Reversal turns the realised gate into its transpose and mirroring swaps the
    roles of the blocks, so this maps cNOT-class layouts to cNOT-class layouts.
    """
    return tuple(tuple(mirror_pair(p, n) for p in step) for step in reversed(pattern))


def count_nn_patterns(length: int, n: int = N_SPINS) -> int:
    return (n - 1) * (n - 2) ** (length - 1) if length > 0 else 1


def all_nn_patterns(length: int, n: int = N_SPINS):
    """Nearest-neighbour serial patterns without back-to-back repeats (a repeat merges into one pulse)."""
    for seq in itertools.product(range(n - 1), repeat=length):
        if all(a != b for a, b in zip(seq, seq[1:])):
            yield nearest_neighbour_pattern(seq)


def random_nn_pattern(rng: np.random.Generator, length: int, n: int = N_SPINS) -> tuple:
    out = [int(rng.integers(n - 1))]
    while len(out) < length:
        k = int(rng.integers(n - 2))
        out.append(k + (k >= out[-1]))
    return nearest_neighbour_pattern(out)


def parallel_pattern(mode: str, cycles: int, n: int = N_SPINS) -> tuple:
    if mode == "parallel-1d":
        pairs = PARALLEL_1D_PAIRS
    elif mode == "parallel-2d":
        pairs = tuple(default_layout(mode, n).pairs())
    else:
        raise DomainError(f"{mode!r} is not a parallel mode")
    return tuple(pairs for _ in range(cycles))


def candidate_patterns(mode: str, max_steps: int) -> list[tuple]:
    """Structured layouts tried before any random search."""
    if mode == "serial":
        if max_steps < len(SERIAL_CNOT_19):
            return []
        p = nearest_neighbour_pattern(SERIAL_CNOT_19)
        return [p, mirror_reverse(p)]
    return [parallel_pattern(mode, max_steps)]


class _RoundRobin:
    """Pattern sampler that walks a fixed list in order, ignoring the generator."""

    def __init__(self, patterns: list):
        self.patterns = patterns
        self.k = 0

    def __call__(self, rng: np.random.Generator) -> tuple:
        p = self.patterns[self.k % len(self.patterns)]
        self.k += 1
        return p


def logical_block(obj: SynthesisObjective, pattern: Pattern, times) -> np.ndarray:
    U, _ = sector_evolution(obj.models[0], pattern, times, with_derivs=False)
    q = obj.models[0].logical_dim
    return U[:q, :q]


def _nearest_unitary(B: np.ndarray) -> np.ndarray:
    u, _, vh = np.linalg.svd(B)
    return u @ vh


_PAULIS = (
    np.array([[0, 1], [1, 0]], dtype=np.complex128),
    np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    np.array([[1, 0], [0, -1]], dtype=np.complex128),
)
_I2 = np.eye(2, dtype=np.complex128)


def _local_generators() -> list[tuple[int, np.ndarray]]:
    """``(slot, G)`` with slot 0 = left factor (A1 x A2), 1 = right factor (B1 x B2)."""
    out = []
    for slot in (0, 1):
        for P in _PAULIS:
            out.append((slot, 1j * np.kron(P, _I2)))
            out.append((slot, 1j * np.kron(_I2, P)))
    return out


def _joint_terms(obj, pattern, times, loc, target):
    ev = evaluate(obj, pattern, times)
    U, dU = sector_evolution(obj.models[0], pattern, times)
    q = obj.models[0].logical_dim
    B, dB = U[:q, :q], dU[:, :q, :]
    L = np.kron(loc[0], loc[1])
    R = np.kron(loc[2], loc[3])
    X = L @ B @ R
    d_times = np.einsum("ij,ajk,kl->ail", L, dB, R)
    d_loc = np.array([L @ G @ B @ R if slot == 0 else L @ B @ R @ G for slot, G in _local_generators()])
    r, J = _aligned_terms(X, np.concatenate([d_times, d_loc]), target)
    J_ev = np.hstack([ev.jacobian, np.zeros((ev.jacobian.shape[0], len(d_loc)))])
    return np.concatenate([ev.residual, r]), np.vstack([J_ev, J])


def _rebase(loc, step):
    out = []
    for k in range(4):
        slot, factor = divmod(k, 2)
        h = sum(step[6 * slot + 2 * p + factor] * _PAULIS[p] for p in range(3))
        out.append(loc[k] @ expm(1j * h))
    return out


def refine_with_corrections(obj: SynthesisObjective, pattern: Pattern, times, target: np.ndarray | None = None,
                            iterations: int = 30):
    """Extract local corrections, then refine durations and corrections together.

    Levenberg-Marquardt on the phase-aligned entrywise residual of
    ``(A1 x A2) U (B1 x B2)`` against ``target``, keeping the objective's own
    residual (invariants, leakage) in the system. Returns
    ``(times, corrections, residual_before, residual_after)``.
    """
    target = obj.target if target is None else target
    times = np.asarray(times, dtype=float)
    B = _nearest_unitary(logical_block(obj, pattern, times))
    *loc, r0 = extract_local_corrections(B, target)
    loc = list(loc)
    n_t = times.size

    r, J = _joint_terms(obj, pattern, times, loc, target)
    cost = r @ r
    mu = 1e-6
    for _ in range(iterations):
        if cost < 1e-30:
            break
        JtJ, g = J.T @ J, J.T @ r
        step = -np.linalg.solve(JtJ + mu * np.diag(np.diag(JtJ) + 1e-12), g)
        t_new, loc_new = times + step[:n_t], _rebase(loc, step[n_t:])
        r_new, J_new = _joint_terms(obj, pattern, t_new, loc_new, target)
        if r_new @ r_new < cost:
            times, loc, r, J, cost = t_new, loc_new, r_new, J_new, r_new @ r_new
            mu = max(mu / 10, 1e-12)
        else:
            mu *= 10
            if mu > 1e6:
                break
    r1 = phase_distance(np.kron(loc[0], loc[1]) @ logical_block(obj, pattern, times) @ np.kron(loc[2], loc[3]), target)
    return times, tuple(loc), r0, r1


def synthesize_cnot(mode: str = "serial", max_steps: int | None = None, restarts: int = 200, seed: int = 42,
                    target: np.ndarray = CNOT, leakage_weight: float = DEFAULT_LEAKAGE_WEIGHT,
                    subsystem: bool = False, refine: bool = True, workers: int | None = None,
                    patterns: Sequence[Pattern] | None = None) -> tuple[OptimizationReport, PulseSequence]:
    """Search exchange durations (and, in serial mode, layouts) for a gate locally equivalent to ``target``.

    ``max_steps`` counts pulses in serial mode and clock cycles in the parallel modes.
    Serial mode first tries the built-in layouts that fit in ``max_steps``, then
    random nearest-neighbour layouts of length ``max_steps`` (all of them, in turn,
    when there are few enough). Each stage gets ``restarts`` restarts. Failure is
    returned as a report with ``success=False``.
    """
    if mode not in MODES:
        raise DomainError(f"unknown mode {mode!r}; expected one of {MODES}")
    max_steps = DEFAULT_CYCLES[mode] if max_steps is None else int(max_steps)
    if max_steps < 1 or restarts < 1:
        raise DomainError("max_steps and restarts must be >= 1")
    t0 = time.perf_counter()
    obj = SynthesisObjective(target=target, equivalence="local", leakage_weight=leakage_weight, subsystem=subsystem)
    stages: list = list(candidate_patterns(mode, max_steps) if patterns is None else patterns)
    if mode == "serial" and patterns is None:
        if count_nn_patterns(max_steps) <= min(restarts, EXHAUSTIVE_LIMIT):
            stages.append(_RoundRobin(list(all_nn_patterns(max_steps))))
        else:
            stages.append(lambda rng: random_nn_pattern(rng, max_steps))

    reports = []
    for stage, pattern in enumerate(stages):
        rep = minimize_multistart(obj, pattern, restarts=restarts, seed=seed + stage, workers=workers)
        reports.append(rep)
        log.info("stage %d: success=%s f=%.3e after %d restarts", stage, rep.success, rep.f, rep.restarts)
        if rep.success:
            break
    best = next((r for r in reports if r.success), min(reports, key=lambda r: r.f))
    report = replace(best, restarts=sum(r.restarts for r in reports),
                     successes=sum(r.successes for r in reports),
                     iterations=sum(r.iterations for r in reports),
                     evaluations=sum(r.evaluations for r in reports),
                     f_history=[f for r in reports for f in r.f_history])

    layout = default_layout(mode, N_SPINS)
    times = np.array(report.times)
    if report.success:
        if refine:
            times, _, r0, r1 = refine_with_corrections(obj, report.pattern, times)
            ev = evaluate(obj, report.pattern, times, with_jacobian=False)
            report = replace(report, times=[float(t) for t in times], f=ev.f, leakage=ev.leakage,
                             residual=r1, residual_unrefined=r0)
        else:
            B = _nearest_unitary(logical_block(obj, report.pattern, times))
            report = replace(report, residual=extract_local_corrections(B, obj.target)[-1])
    report = replace(report, wall_time=time.perf_counter() - t0)
    seq = PulseSequence.from_pattern(mode, N_SPINS, report.pattern, report.times, layout)
    return report, seq


def sweep_pattern(cycles: int, n: int = N_SPINS) -> tuple:
    """Back-and-forth nearest-neighbour sweep, ``cycles`` passes of 0..n-2..1."""
    one = list(range(n - 1)) + list(range(n - 3, 0, -1))
    return nearest_neighbour_pattern(one * cycles)


def prune_pattern(obj: SynthesisObjective, pattern: Pattern, restarts: int = 40, seed: int = 0,
                  min_steps: int = 1, workers: int | None = None) -> tuple[tuple, OptimizationReport]:
    """Greedy step deletion: drop any single step whose removal still admits a solution.

    Starting from a long pattern that works (for instance :func:`sweep_pattern`),
    this is how short layouts such as ``SERIAL_CNOT_19`` can be rediscovered.
    """
    pattern = tuple(tuple(s) for s in pattern)
    rep = minimize_multistart(obj, pattern, restarts=restarts, seed=seed, workers=workers)
    if not rep.success:
        raise NoSolutionError(f"starting pattern has no solution within {restarts} restarts (f={rep.f:.3e})")
    changed = True
    while changed and len(pattern) > min_steps:
        changed = False
        for k in range(len(pattern)):
            trial = pattern[:k] + pattern[k + 1:]
            r = minimize_multistart(obj, trial, restarts=restarts, seed=seed, workers=workers)
            if r.success:
                log.info("removed step %d, %d steps left", k, len(trial))
                pattern, rep, changed = trial, r, True
                break
    return pattern, rep
