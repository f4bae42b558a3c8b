"""Exchange-only quantum computation on three-spin coded qubits."""

__version__ = "0.1.0"

from .encoding import (BLOCK_A, BLOCK_B, TWO_BLOCK, CodeBlock, bloch_axis, logical_action, logical_basis,
                       logical_one, logical_zero, measure_singlet_triplet)
from .errors import (DomainError, ExchangeError, InvalidPairError, InvalidSequenceError, InvalidStepError,
                     NoSolutionError, ScheduleFormatError)
from .gate_equivalence import (CNOT, CZ, SQRT_SWAP, SWAP, InvariantPair, extract_local_corrections,
                               locally_equivalent, makhlin_invariants)
from .sectors import SectorBasis, basis_checksum, project_to_block, sector_basis, sector_dimension
from .spin_core import (SpinRegister, exchange_hamiltonian, exchange_unitary, parallel_step_unitary,
                        spin_operators, swap_operator, total_spin_operators, total_spin_squared)
from .synthesis import (OptimizationReport, PulseSequence, SynthesisObjective, analytic_gradient,
                        decompose_single_qubit, evaluate_objective, minimize_multistart, sequence_unitary,
                        synthesize_cnot)

__all__ = [name for name in dir() if not name.startswith("_")]
