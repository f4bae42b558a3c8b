"""Pulse sequences under serial / 1D-parallel / 2D-parallel layout rules."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ..errors import InvalidSequenceError
from ..spin_core import SpinRegister, parallel_step_unitary

MODES = ("serial", "parallel-1d", "parallel-2d")

Coupling = tuple[int, int, float]
Step = tuple[Coupling, ...]


@dataclass(frozen=True)
class Layout:
    """Which pairs may be coupled: ``line``, ``grid`` (rows x cols, row-major) or ``complete``."""

    kind: str
    n: int
    rows: int = 1
    cols: int = 0

    @classmethod
    def parse(cls, text: str, n: int) -> "Layout":
        if text == "line":
            return cls("line", n, 1, n)
        if text == "complete":
            return cls("complete", n)
        if text.startswith("grid"):
            try:
                rows, cols = (int(v) for v in text.split(":", 1)[1].lower().split("x"))
            except (IndexError, ValueError):
                raise InvalidSequenceError(f"grid layout must look like 'grid:2x3', got {text!r}") from None
            if rows * cols != n:
                raise InvalidSequenceError(f"grid {rows}x{cols} does not hold {n} spins")
            return cls("grid", n, rows, cols)
        raise InvalidSequenceError(f"unknown layout {text!r}")

    def __str__(self) -> str:
        return f"grid:{self.rows}x{self.cols}" if self.kind == "grid" else self.kind

    def pairs(self) -> list[tuple[int, int]]:
        """Allowed pairs, each as (low, high), sorted."""
        if self.kind == "complete":
            return list(itertools.combinations(range(self.n), 2))
        if self.kind == "line":
            return [(i, i + 1) for i in range(self.n - 1)]
        out = []
        for r in range(self.rows):
            for c in range(self.cols):
                s = r * self.cols + c
                if c + 1 < self.cols:
                    out.append((s, s + 1))
                if r + 1 < self.rows:
                    out.append((s, s + self.cols))
        return sorted(out)

    def allows(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in set(self.pairs())


def default_layout(mode: str, n: int) -> Layout:
    if mode == "parallel-2d":
        if n % 3 == 0:
            return Layout("grid", n, n // 3, 3)
        return Layout.parse(f"grid:1x{n}", n)
    return Layout.parse("line", n)


def canonical_tau(tau: float) -> float:
    """Map a duration into [0, 1); whole periods only change the global phase."""
    t = math.fmod(float(tau), 1.0)
    if t < 0:
        t += 1.0
    return 0.0 if t >= 1.0 else t


@dataclass(frozen=True)
class PulseSequence:
    """Ordered exchange steps; each step is a tuple of ``(i, j, tau)`` couplings."""

    mode: str
    n: int
    steps: tuple[Step, ...]
    layout: Layout = field(default=None)

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidSequenceError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.layout is None:
            object.__setattr__(self, "layout", default_layout(self.mode, self.n))
        steps = tuple(tuple((int(i), int(j), float(t)) for i, j, t in step) for step in self.steps)
        object.__setattr__(self, "steps", steps)
        self.validate()

    @classmethod
    def serial(cls, couplings: Iterable[Coupling], n: int, layout: Layout | str | None = None) -> "PulseSequence":
        if isinstance(layout, str):
            layout = Layout.parse(layout, n)
        return cls("serial", n, tuple((c,) for c in couplings), layout)

    @classmethod
    def from_pattern(cls, mode: str, n: int, pattern: Sequence[Sequence[tuple[int, int]]], times: Sequence[float],
                     layout: Layout | None = None) -> "PulseSequence":
        """Fill a pattern (pairs per step) with a flat vector of durations."""
        times = list(times)
        if sum(len(s) for s in pattern) != len(times):
            raise InvalidSequenceError("number of durations does not match the pattern")
        it = iter(times)
        steps = tuple(tuple((i, j, next(it)) for i, j in step) for step in pattern)
        return cls(mode, n, steps, layout)

    def validate(self) -> None:
        allowed = set(self.layout.pairs())
        if self.layout.n != self.n:
            raise InvalidSequenceError(f"layout is for {self.layout.n} spins, sequence has {self.n}")
        for k, step in enumerate(self.steps):
            if self.mode == "serial" and len(step) != 1:
                raise InvalidSequenceError(f"serial step {k} has {len(step)} couplings; expected exactly one")
            seen = set()
            for i, j, tau in step:
                key = (min(i, j), max(i, j))
                if i == j or key not in allowed:
                    raise InvalidSequenceError(f"step {k}: pair ({i}, {j}) not allowed by layout {self.layout}")
                if key in seen:
                    raise InvalidSequenceError(f"step {k}: pair {key} repeated")
                if not math.isfinite(tau):
                    raise InvalidSequenceError(f"step {k}: non-finite duration")
                seen.add(key)

    @property
    def pattern(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        return tuple(tuple((i, j) for i, j, _ in step) for step in self.steps)

    @property
    def times(self) -> np.ndarray:
        return np.array([t for step in self.steps for _, _, t in step], dtype=float)

    @property
    def n_interactions(self) -> int:
        return sum(1 for step in self.steps for c in step if canonical_tau(c[2]) != 0.0)

    def with_times(self, times: Sequence[float]) -> "PulseSequence":
        return PulseSequence.from_pattern(self.mode, self.n, self.pattern, times, self.layout)

    def canonical(self) -> "PulseSequence":
        """Durations of single-coupling steps reduced to [0, 1)."""
        steps = []
        for step in self.steps:
            if len(step) == 1:
                i, j, t = step[0]
                step = ((i, j, canonical_tau(t)),)
            steps.append(step)
        return PulseSequence(self.mode, self.n, tuple(steps), self.layout)

    def __len__(self) -> int:
        return len(self.steps)


def sequence_unitary(seq: PulseSequence) -> np.ndarray:
    """Full ``2**n`` unitary ``U_N ... U_2 U_1`` (first step acts first)."""
    seq.validate()
    reg = SpinRegister(seq.n)
    U = np.eye(reg.dim, dtype=np.complex128)
    for step in seq.steps:
        U = parallel_step_unitary(reg, step) @ U
    return U
