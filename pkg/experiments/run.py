"""Best-effort searches that are too expensive for the test suite.

    python experiments/run.py parallel --mode parallel-1d --cycles 8 --restarts 400 --seed 7
    python experiments/run.py parallel --mode parallel-2d --cycles 7 --restarts 400 --seed 7
    python experiments/run.py parallel --mode parallel-1d --cycles 8 --subsystem --seed 7
    python experiments/run.py discover --cycles 4 --restarts 40 --seed 0
    python experiments/run.py sqrt-swap --max-steps 24 --restarts 300 --seed 5

Each run prints one JSON line with the outcome; nothing here is assumed to succeed.
"""

from __future__ import annotations

import argparse
import json
import logging

import numpy as np

from exchange_qc.gate_equivalence import SQRT_SWAP
from exchange_qc.synthesis.cnot import prune_pattern, sweep_pattern, synthesize_cnot
from exchange_qc.synthesis.objective import SynthesisObjective


def _summary(report, **extra) -> dict:
    h = np.array(report.f_history)
    return {
        "success": report.success,
        "f": report.f,
        "leakage": report.leakage,
        "residual": report.residual,
        "restarts": report.restarts,
        "f_quartiles": np.percentile(h, [0, 25, 50, 75]).tolist() if h.size else [],
        "wall_time": round(report.wall_time, 2),
        **extra,
    }


def parallel(args) -> dict:
    report, seq = synthesize_cnot(args.mode, args.cycles, restarts=args.restarts, seed=args.seed,
                                  subsystem=args.subsystem, workers=args.workers)
    return _summary(report, mode=args.mode, cycles=args.cycles, seed=args.seed, times=report.times)


def discover(args) -> dict:
    # greedy deletion from a back-and-forth sweep; this is how the 19-pulse layout was found
    obj = SynthesisObjective()
    pattern, report = prune_pattern(obj, sweep_pattern(args.cycles), restarts=args.restarts, seed=args.seed,
                                     workers=args.workers)
    return _summary(report, steps=len(pattern), layout=[s[0][0] for s in pattern], seed=args.seed)


def sqrt_swap(args) -> dict:
    report, _ = synthesize_cnot("serial", args.max_steps, restarts=args.restarts, seed=args.seed,
                                target=SQRT_SWAP, workers=args.workers)
    return _summary(report, target="sqrt-swap", max_steps=args.max_steps, seed=args.seed)


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    a = sub.add_parser("parallel")
    a.add_argument("--mode", choices=("parallel-1d", "parallel-2d"), default="parallel-1d")
    a.add_argument("--cycles", type=int, default=8)
    a.add_argument("--restarts", type=int, default=400)
    a.add_argument("--seed", type=int, default=7)
    a.add_argument("--subsystem", action="store_true")
    a.set_defaults(func=parallel)
    d = sub.add_parser("discover")
    d.add_argument("--cycles", type=int, default=4)
    d.add_argument("--restarts", type=int, default=40)
    d.add_argument("--seed", type=int, default=0)
    d.set_defaults(func=discover)
    s = sub.add_parser("sqrt-swap")
    s.add_argument("--max-steps", type=int, default=24)
    s.add_argument("--restarts", type=int, default=300)
    s.add_argument("--seed", type=int, default=5)
    s.set_defaults(func=sqrt_swap)
    args = p.parse_args()
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    print(json.dumps(args.func(args), default=float))


if __name__ == "__main__":
    main()
