"""JSON schedule files: exchange durations stored as decimal strings."""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import InvalidSequenceError, ScheduleFormatError
from .synthesis.sequence import Layout, PulseSequence

FORMAT_VERSION = 1
_DECIMAL = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")


def format_tau(tau: float) -> str:
    """17 significant digits, enough to round-trip any double."""
    return f"{float(tau):.16e}"


@dataclass(frozen=True)
class ScheduleFile:
    n_spins: int
    mode: str
    layout: str
    steps: tuple[tuple[tuple[int, int, str], ...], ...]
    metadata: dict = field(default_factory=dict, compare=True)
    version: int = FORMAT_VERSION

    @classmethod
    def from_sequence(cls, seq: PulseSequence, metadata: dict | None = None) -> "ScheduleFile":
        steps = tuple(tuple((i, j, format_tau(t)) for i, j, t in step) for step in seq.steps)
        return cls(seq.n, seq.mode, str(seq.layout), steps, dict(metadata or {}))

    def to_sequence(self) -> PulseSequence:
        layout = Layout.parse(self.layout, self.n_spins)
        steps = tuple(tuple((i, j, float(t)) for i, j, t in step) for step in self.steps)
        return PulseSequence(self.mode, self.n_spins, steps, layout)

    def to_dict(self) -> dict[str, Any]:
        return {
            "version": self.version,
            "n_spins": self.n_spins,
            "mode": self.mode,
            "layout": self.layout,
            "steps": [[{"i": i, "j": j, "tau": t} for i, j, t in step] for step in self.steps],
            "metadata": self.metadata,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ScheduleFormatError(msg)


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def parse_schedule(data: dict) -> ScheduleFile:
    """Validate a decoded JSON document and build a :class:`ScheduleFile`."""
    _require(isinstance(data, dict), "schedule must be a JSON object")
    missing = {"version", "n_spins", "mode", "layout", "steps"} - set(data)
    _require(not missing, f"schedule is missing {sorted(missing)}")
    _require(data["version"] == FORMAT_VERSION, f"unsupported schedule version {data['version']!r}")
    _require(_is_int(data["n_spins"]) and data["n_spins"] >= 1, "n_spins must be a positive integer")
    _require(isinstance(data["mode"], str) and isinstance(data["layout"], str), "mode and layout must be strings")
    _require(isinstance(data["steps"], list), "steps must be a list")
    meta = data.get("metadata", {})
    _require(isinstance(meta, dict), "metadata must be an object")
    steps = []
    for k, step in enumerate(data["steps"]):
        _require(isinstance(step, list), f"step {k} must be a list of couplings")
        out = []
        for c in step:
            _require(isinstance(c, dict) and set(c) == {"i", "j", "tau"}, f"step {k}: couplings need exactly i, j, tau")
            _require(_is_int(c["i"]) and _is_int(c["j"]), f"step {k}: i and j must be integers")
            tau = c["tau"]
            _require(isinstance(tau, str) and _DECIMAL.match(tau) is not None,
                     f"step {k}: tau must be a decimal string, got {tau!r}")
            _require(math.isfinite(float(tau)), f"step {k}: tau is not finite")
            out.append((c["i"], c["j"], tau))
        steps.append(tuple(out))
    sched = ScheduleFile(data["n_spins"], data["mode"], data["layout"], tuple(steps), meta, data["version"])
    try:
        sched.to_sequence()
    except (InvalidSequenceError, IndexError, ValueError) as exc:
        raise ScheduleFormatError(f"schedule violates its layout: {exc}") from exc
    return sched


def loads(text: str) -> ScheduleFile:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScheduleFormatError(f"not valid JSON: {exc}") from exc
    return parse_schedule(data)


def load(path: str | Path) -> ScheduleFile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ScheduleFormatError(f"cannot read {path}: {exc}") from exc
    return loads(text)
