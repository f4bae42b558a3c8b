"""Command line: ``exchange-qc {synthesize,verify,sector-info,single-qubit,bloch-axis}``.

Exit codes: 0 success, 1 verification failed, 2 search failed, 64 usage error,
65 bad input data.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .encoding import BLOCK_A, bloch_axis
from .errors import DomainError, ExchangeError, ScheduleFormatError
from .schedule import ScheduleFile, load
from .sectors import basis_checksum, half_integer, sector_basis
from .synthesis.cnot import synthesize_cnot
from .synthesis.objective import DEFAULT_LEAKAGE_WEIGHT, SynthesisObjective
from .synthesis.optimize import default_workers
from .synthesis.sequence import MODES
from .synthesis.single_qubit import FLAVORS, decompose_single_qubit, synthesize_single_qubit
from .targets import parse_target
from .verify import DEFAULT_THRESHOLDS, verify_sequence

EXIT_OK, EXIT_FAILED, EXIT_SEARCH, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 64, 65


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _num(x):
    """JSON-safe float: non-finite values become strings."""
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else str(x)


def _write(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _target(text: str) -> np.ndarray:
    try:
        return parse_target(text)
    except DomainError as exc:
        raise UsageError(str(exc)) from None


# ---------------------------------------------------------------------------

def cmd_synthesize(args) -> int:
    target = _target(args.target)
    if args.max_steps is not None and args.max_steps < 1:
        raise UsageError("--max-steps must be >= 1")
    if args.restarts < 1:
        raise UsageError("--restarts must be >= 1")
    meta = {"tool": "exchange_qc", "tool_version": __version__, "seed": args.seed, "target": args.target,
            "mode": args.mode, "restarts_budget": args.restarts}
    if target.shape == (4, 4):
        obj = SynthesisObjective(target=target, leakage_weight=args.leakage_weight, subsystem=args.subsystem)
        report, seq = synthesize_cnot(args.mode, args.max_steps, args.restarts, args.seed, target=target,
                                      leakage_weight=args.leakage_weight, subsystem=args.subsystem,
                                      workers=args.workers)
        success = report.success
        meta.update(objective=obj.describe(), success=success, f=_num(report.f), leakage=_num(report.leakage),
                    residual=_num(report.residual), residual_unrefined=_num(report.residual_unrefined),
                    restarts=report.restarts, best_restart=report.best_restart)
        details = asdict(report)
        details["pattern"] = [list(map(list, s)) for s in report.pattern]
    else:
        if args.mode not in MODES:
            raise UsageError(f"unknown mode {args.mode}")
        res = synthesize_single_qubit(target, args.mode, 4 if args.max_steps is None else args.max_steps,
                                      restarts=min(args.restarts, 256), seed=args.seed)
        seq, success = res.sequence, res.success
        meta.update(objective="exact match to 2x2 target", success=success, residual=_num(res.residual),
                    restarts=res.restarts)
        details = {"residual": _num(res.residual), "restarts": res.restarts, "success": success}
    if not args.timing:
        details.pop("wall_time", None)
    else:
        meta["wall_time"] = details.get("wall_time")
    details = {k: (_num(v) if isinstance(v, float) else v) for k, v in details.items()}
    if "f_history" in details:
        details["f_history"] = [_num(v) for v in details["f_history"]]

    sched = ScheduleFile.from_sequence(seq.canonical(), meta)
    _write(args.output, sched.dumps())
    if args.report:
        Path(args.report).write_text(json.dumps(details, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    status = "success" if success else "FAILED"
    print(f"{status}: {len(seq)} steps, residual={meta.get('residual')}", file=sys.stderr)
    return EXIT_OK if success else EXIT_SEARCH


def cmd_verify(args) -> int:
    sched = load(args.schedule)
    name = args.target or sched.metadata.get("target")
    if not name:
        raise UsageError("no --target given and the schedule does not name one")
    target = _target(name)
    thresholds = {k: v for k, v in (("f", args.f_max), ("residual", args.residual_max),
                                    ("leakage", args.leakage_max), ("off_block", args.off_block_max)) if v is not None}
    try:
        rep = verify_sequence(sched.to_sequence(), target, thresholds)
    except DomainError as exc:
        raise ScheduleFormatError(str(exc)) from exc
    if args.json:
        print(json.dumps({k: (_num(v) if isinstance(v, float) else v) for k, v in rep.to_dict().items()},
                         indent=2, sort_keys=True))
    else:
        print(f"target    {name}")
        print(f"f         {rep.f:.3e}")
        print(f"leakage   {rep.leakage:.3e}")
        print(f"residual  {rep.residual:.3e}")
        print(f"off-block {rep.off_block:.3e}  ({rep.sector}, {rep.logical_dim}+{rep.sector_dim - rep.logical_dim})")
        for k, ok in rep.checks.items():
            print(f"  {'pass' if ok else 'FAIL'}  {k}")
        print("PASS" if rep.passed else "FAIL")
    return EXIT_OK if rep.passed else EXIT_FAILED


def cmd_sector_info(args) -> int:
    try:
        S, Sz = half_integer(args.S), half_integer(args.Sz)
        basis = sector_basis(args.n, S, Sz)
    except (ValueError, IndexError) as exc:
        raise UsageError(str(exc)) from None
    out = {"n": args.n, "S": str(S), "Sz": str(Sz), "dim": basis.dim, "checksum": basis_checksum(basis)}
    if args.json:
        print(json.dumps(out, sort_keys=True))
    else:
        print(f"dim {basis.dim}")
        print(f"checksum {out['checksum']}")
    return EXIT_OK


def cmd_single_qubit(args) -> int:
    target = _target(args.target)
    if target.shape != (2, 2):
        raise UsageError("single-qubit needs a 2x2 target")
    res = decompose_single_qubit(target, args.flavor, restarts=args.restarts, seed=args.seed)
    meta = {"tool": "exchange_qc", "tool_version": __version__, "seed": args.seed, "target": args.target,
            "flavor": args.flavor, "success": res.success, "residual": _num(res.residual)}
    sched = ScheduleFile.from_sequence(res.sequence, meta)
    _write(args.output, sched.dumps())
    print(f"{'success' if res.success else 'FAILED'}: residual={res.residual:.3e}", file=sys.stderr)
    return EXIT_OK if res.success else EXIT_SEARCH


def cmd_bloch_axis(args) -> int:
    try:
        axis, rate = bloch_axis((args.i, args.j), BLOCK_A)
        axis = axis + 0.0
    except (ValueError, IndexError) as exc:
        raise UsageError(str(exc)) from None
    angle = math.degrees(math.acos(max(-1.0, min(1.0, axis[2]))))
    print(f"axis  {axis[0]:+.12f} {axis[1]:+.12f} {axis[2]:+.12f}")
    print(f"rate  {rate:.12f}  (rad per unit tau)")
    print(f"angle {angle:.9f}  (degrees from z)")
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="exchange-qc", description="Exchange-only gate synthesis on three-spin coded qubits.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synthesize", help="search exchange durations for a logical gate")
    s.add_argument("--target", required=True, help="cnot, cz, swap-logical, rz:THETA, rx:THETA, h, file:PATH")
    s.add_argument("--mode", choices=MODES, default="serial")
    s.add_argument("--max-steps", type=int, default=None, help="pulses (serial) or clock cycles (parallel)")
    s.add_argument("--restarts", type=int, default=200)
    s.add_argument("--seed", type=int, default=42)
    s.add_argument("--leakage-weight", type=float, default=DEFAULT_LEAKAGE_WEIGHT)
    s.add_argument("--subsystem", action="store_true", help="also constrain the six-spin S=0 sector")
    s.add_argument("--workers", type=int, default=None, help="parallel restart workers (default: $EXCHANGE_QC_WORKERS or 1)")
    s.add_argument("-o", "--output", default=None, help="schedule file (default: stdout)")
    s.add_argument("--report", default=None, help="optional JSON search report")
    s.add_argument("--timing", action="store_true", help="record wall time (makes output non-reproducible)")
    s.set_defaults(func=cmd_synthesize)

    v = sub.add_parser("verify", help="re-derive a schedule's gate and check it")
    v.add_argument("schedule")
    v.add_argument("--target", default=None)
    v.add_argument("--f-max", type=float, default=None, help=f"default {DEFAULT_THRESHOLDS['f']:g}")
    v.add_argument("--residual-max", type=float, default=None, help=f"default {DEFAULT_THRESHOLDS['residual']:g}")
    v.add_argument("--leakage-max", type=float, default=None)
    v.add_argument("--off-block-max", type=float, default=None)
    v.add_argument("--json", action="store_true")
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("sector-info", help="dimension and basis checksum of a total-spin sector")
    c.add_argument("n", type=int)
    c.add_argument("S")
    c.add_argument("Sz")
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_sector_info)

    q = sub.add_parser("single-qubit", help="decompose a one-qubit gate on one block")
    q.add_argument("--target", required=True)
    q.add_argument("--flavor", choices=FLAVORS, default="serial-4-nearest")
    q.add_argument("--restarts", type=int, default=64)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("-o", "--output", default=None)
    q.set_defaults(func=cmd_single_qubit)

    b = sub.add_parser("bloch-axis", help="logical rotation axis of an exchange pair within a block")
    b.add_argument("i", type=int)
    b.add_argument("j", type=int)
    b.set_defaults(func=cmd_bloch_axis)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "workers", None) is None and hasattr(args, "workers"):
        args.workers = default_workers()
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"exchange-qc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ScheduleFormatError as exc:
        print(f"exchange-qc: bad schedule: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ExchangeError as exc:
        print(f"exchange-qc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
