"""Pulse sequences, the synthesis objective and the searches built on it."""

from .cnot import SERIAL_CNOT_19, synthesize_cnot
from .objective import SynthesisObjective, analytic_gradient, evaluate_objective
from .optimize import OptimizationReport, minimize_multistart
from .sequence import Layout, PulseSequence, sequence_unitary
from .single_qubit import decompose_single_qubit

__all__ = [
    "SERIAL_CNOT_19", "Layout", "OptimizationReport", "PulseSequence", "SynthesisObjective",
    "analytic_gradient", "decompose_single_qubit", "evaluate_objective", "minimize_multistart",
    "sequence_unitary", "synthesize_cnot",
]
