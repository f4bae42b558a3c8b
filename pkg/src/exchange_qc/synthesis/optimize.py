"""Multi-start local minimisation of pulse durations."""

from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import least_squares, minimize

from .objective import Pattern, SynthesisObjective, evaluate, objective_and_gradient, objective_value
from .sequence import canonical_tau

log = logging.getLogger(__name__)

SUCCESS_F = 1e-12
SUCCESS_LEAKAGE = 1e-8
POLISH_FROM = 1e-4
WORKERS_ENV = "EXCHANGE_QC_WORKERS"


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def restart_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based stream for restart ``index``: Philox keyed by (seed, index)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(index)])))


@dataclass
class RestartResult:
    index: int
    times: np.ndarray
    f: float
    leakage: float
    iterations: int
    evaluations: int
    pattern: tuple = ()


@dataclass
class OptimizationReport:
    """Outcome of a multi-start search. ``f_history`` keeps every restart's final f."""

    pattern: tuple
    times: list[float]
    f: float
    leakage: float
    success: bool
    seed: int
    restarts: int
    successes: int
    best_restart: int
    iterations: int
    evaluations: int
    wall_time: float
    residual: float | None = None
    residual_unrefined: float | None = None
    method: str = "bfgs"
    f_history: list[float] = field(default_factory=list)

    @property
    def f_min(self) -> float:
        return self.f


def canonical_times(pattern: Pattern, times: Sequence[float]) -> np.ndarray:
    """Reduce durations of single-coupling steps mod 1; overlapping parallel terms are not 1-periodic."""
    out = np.array(times, dtype=float)
    k = 0
    for step in pattern:
        if len(step) == 1:
            out[k] = canonical_tau(out[k])
        k += len(step)
    return out


def polish(obj: SynthesisObjective, pattern: Pattern, times: np.ndarray, max_nfev: int = 200) -> np.ndarray:
    """Gauss-Newton/Levenberg-Marquardt refinement of an (almost) zero-residual point."""

    def fun(x):
        return evaluate(obj, pattern, x, with_jacobian=False).residual

    def jac(x):
        return evaluate(obj, pattern, x).jacobian

    n_res = evaluate(obj, pattern, times, with_jacobian=False).residual.size
    method = "lm" if n_res >= len(times) else "trf"
    try:
        res = least_squares(fun, times, jac=jac, method=method, xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=max_nfev)
    except (ValueError, np.linalg.LinAlgError):
        return times
    better = objective_value(obj, pattern, res.x) <= objective_value(obj, pattern, times)
    return res.x if better else times


def local_minimize(obj: SynthesisObjective, pattern: Pattern, x0: np.ndarray, method: str = "bfgs"):
    """One local search from ``x0``; returns ``(times, iterations, evaluations)``."""
    nit = nfev = 0
    x = np.asarray(x0, dtype=float)
    if method == "bfgs":
        with np.errstate(all="ignore"):
            res = minimize(objective_and_gradient, x, args=(obj, pattern), jac=True, method="BFGS",
                           options={"gtol": 1e-10, "maxiter": 3000})
        nit, nfev = int(res.nit), int(res.nfev)
        if np.all(np.isfinite(res.x)) and np.isfinite(res.fun):
            x = res.x
        else:
            method = "nelder-mead"
    elif method == "lm":
        x = polish(obj, pattern, x, max_nfev=1000)
    if method == "nelder-mead":
        # derivative-free fallback
        res = minimize(lambda t: objective_value(obj, pattern, t), x, method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-16, "maxiter": 20000, "adaptive": True})
        nit += int(res.nit)
        nfev += int(res.nfev)
        x = res.x
    if objective_value(obj, pattern, x) < POLISH_FROM:
        x = polish(obj, pattern, x)
    return x, nit, nfev


def _one_restart(task) -> RestartResult:
    obj, pattern, seed, index, method, x0 = task
    rng = restart_rng(seed, index)
    n_par = sum(len(s) for s in pattern)
    start = rng.random(n_par) if x0 is None else np.asarray(x0, dtype=float)
    x, nit, nfev = local_minimize(obj, pattern, start, method)
    x = canonical_times(pattern, x)
    ev = evaluate(obj, pattern, x, with_jacobian=False)
    f = ev.f if np.isfinite(ev.f) else np.inf
    return RestartResult(index, x, f, ev.leakage, nit, nfev, tuple(tuple(s) for s in pattern))


def is_success(f: float, leakage: float, f_tol: float = SUCCESS_F, leak_tol: float = SUCCESS_LEAKAGE) -> bool:
    return f < f_tol and leakage < leak_tol


def run_restarts(tasks: Sequence[tuple], workers: int, stop_on_success: bool, accept: Callable[[RestartResult], bool]):
    """Evaluate restart tasks in index order, optionally in parallel chunks.

    Stopping happens only at chunk boundaries and the reducer always prefers the
    lowest-index success, so the outcome does not depend on ``workers``.
    """
    results: list[RestartResult] = []
    if workers <= 1:
        for t in tasks:
            r = _one_restart(t)
            results.append(r)
            if stop_on_success and accept(r):
                break
        return results
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for start in range(0, len(tasks), workers):
            chunk = list(pool.map(_one_restart, tasks[start:start + workers]))
            for r in chunk:
                results.append(r)
                if stop_on_success and accept(r):
                    return results
    return results


def pick_best(results: Sequence[RestartResult], accept: Callable[[RestartResult], bool]) -> RestartResult:
    winners = [r for r in results if accept(r)]
    if winners:
        return min(winners, key=lambda r: r.index)
    return min(results, key=lambda r: (r.f, r.index))


PatternSampler = Callable[[np.random.Generator], Pattern]


def _freeze(pattern: Pattern) -> tuple:
    return tuple(tuple((int(i), int(j)) for i, j in step) for step in pattern)


def minimize_multistart(obj: SynthesisObjective, pattern: Pattern | PatternSampler, restarts: int = 100, seed: int = 0,
                        method: str = "bfgs", stop_on_success: bool = True, workers: int | None = None,
                        f_tol: float = SUCCESS_F, leak_tol: float = SUCCESS_LEAKAGE,
                        initial: Sequence[float] | None = None) -> OptimizationReport:
    """Minimise the objective over durations from many uniform random starts in [0, 1).

    Restart ``k`` draws its start from :func:`restart_rng` ``(seed, k)``. Failing to
    reach ``f < f_tol`` is reported (``success=False``), not raised. ``initial``
    replaces the random start of restart 0.

    ``pattern`` may also be a callable drawing a pattern from the restart's
    generator; the start times then come from the same stream.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    if method not in ("bfgs", "lm", "nelder-mead"):
        raise ValueError(f"unknown method {method!r}")
    workers = default_workers() if workers is None else workers
    t0 = time.perf_counter()
    tasks = []
    for k in range(restarts):
        x0 = initial if (k == 0 and initial is not None) else None
        if callable(pattern):
            rng = restart_rng(seed, k)
            pat = _freeze(pattern(rng))
            if x0 is None:
                x0 = rng.random(sum(len(s) for s in pat))
        else:
            pat = _freeze(pattern)
        tasks.append((obj, pat, seed, k, method, x0))

    def accept(r):
        return is_success(r.f, r.leakage, f_tol, leak_tol)

    results = run_restarts(tasks, workers, stop_on_success, accept)
    best = pick_best(results, accept)
    success = accept(best)
    if stop_on_success and success:
        results = [r for r in results if r.index <= best.index]
    log.info("multistart: %d restarts, best f=%.3e (restart %d)", len(results), best.f, best.index)
    return OptimizationReport(
        pattern=best.pattern,
        times=[float(t) for t in best.times],
        f=float(best.f),
        leakage=float(best.leakage),
        success=success,
        seed=seed,
        restarts=len(results),
        successes=sum(accept(r) for r in results),
        best_restart=best.index,
        iterations=sum(r.iterations for r in results),
        evaluations=sum(r.evaluations for r in results),
        wall_time=time.perf_counter() - t0,
        method=method,
        f_history=[float(r.f) for r in results],
    )
