"""Three-spin encoded qubits.

A logical qubit lives in the S=1/2, Sz=+1/2 states of three spins (a, b, c)::

    |0_L> = |S>_ab |up>_c
    |1_L> = sqrt(2/3) |T+>_ab |down>_c - sqrt(1/3) |T0>_ab |up>_c

with ``|S> = (|ud> - |du>)/sqrt2``, ``|T0> = (|ud> + |du>)/sqrt2`` and ``|T+> = |uu>``.
The Sz=-1/2 partners (used by the decoherence-free-subsystem variant) are obtained
by applying the block lowering operator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError
from .sectors import BlockDecomposition, project_to_block
from .spin_core import DOWN, UP, SpinRegister, exchange_hamiltonian, swap_operator

_S2 = np.sqrt(0.5)
SINGLET = _S2 * (np.kron(UP, DOWN) - np.kron(DOWN, UP))
TRIPLET_0 = _S2 * (np.kron(UP, DOWN) + np.kron(DOWN, UP))
TRIPLET_PLUS = np.kron(UP, UP)
TRIPLET_MINUS = np.kron(DOWN, DOWN)

NORM_TOL = 1e-10


@dataclass(frozen=True)
class CodeBlock:
    """Three distinct sites; ``sites[0], sites[1]`` carry the singlet/triplet pair."""

    sites: tuple[int, int, int]

    def __post_init__(self):
        sites = tuple(int(s) for s in self.sites)
        if len(sites) != 3 or len(set(sites)) != 3 or min(sites) < 0:
            raise DomainError(f"a code block needs three distinct non-negative sites, got {self.sites}")
        object.__setattr__(self, "sites", sites)

    def local_pair(self, i: int, j: int) -> tuple[int, int]:
        """Positions of global sites ``i, j`` within the block."""
        try:
            return self.sites.index(i), self.sites.index(j)
        except ValueError:
            raise DomainError(f"pair ({i}, {j}) is not inside block {self.sites}") from None


BLOCK_A = CodeBlock((0, 1, 2))
BLOCK_B = CodeBlock((3, 4, 5))


def _block_state(which: int, sz_up: bool = True) -> np.ndarray:
    """3-spin state in block-local site order (pair, pair, third)."""
    if which == 0:
        psi = np.kron(SINGLET, UP)
    elif which == 1:
        psi = np.sqrt(2 / 3) * np.kron(TRIPLET_PLUS, DOWN) - np.sqrt(1 / 3) * np.kron(TRIPLET_0, UP)
    else:
        raise DomainError(f"logical label must be 0 or 1, got {which}")
    if sz_up:
        return psi
    lower = sum(_lowering(3, k) for k in range(3))
    psi = lower @ psi
    return psi / np.linalg.norm(psi)


def _lowering(n: int, site: int) -> np.ndarray:
    op = np.array([[0, 0], [1, 0]], dtype=np.complex128)  # |down><up|
    out = np.ones((1, 1), dtype=np.complex128)
    for k in range(n):
        out = np.kron(out, op if k == site else np.eye(2))
    return out


def place_blocks(block_states: Sequence[np.ndarray], blocks: Sequence[CodeBlock], n: int) -> np.ndarray:
    """Tensor product of per-block 3-spin states placed on their sites of an n-spin register."""
    order = [s for b in blocks for s in b.sites]
    if sorted(order) != list(range(n)):
        raise DomainError(f"blocks {[b.sites for b in blocks]} must partition {n} sites")
    psi = np.ones(1, dtype=np.complex128)
    for st in block_states:
        psi = np.kron(psi, st)
    tensor = psi.reshape([2] * n)
    # axis k of `tensor` is site order[k]; move it to axis order[k]
    return np.moveaxis(tensor, list(range(n)), order).reshape(-1)


def logical_zero(block: CodeBlock = BLOCK_A, n: int = 3) -> np.ndarray:
    """``|0_L>`` of a block that alone makes up an n=3 register."""
    return place_blocks([_block_state(0)], [_relabel(block, n)], n)


def logical_one(block: CodeBlock = BLOCK_A, n: int = 3) -> np.ndarray:
    """``|1_L>`` of a block that alone makes up an n=3 register."""
    return place_blocks([_block_state(1)], [_relabel(block, n)], n)


def _relabel(block: CodeBlock, n: int) -> CodeBlock:
    if n != 3 or sorted(block.sites) != [0, 1, 2]:
        raise DomainError("single-block states need a block covering sites 0..2 of a 3-spin register")
    return block


@dataclass(frozen=True, eq=False)
class LogicalBasis:
    """Logical computational basis ``|0..0_L>, ..., |1..1_L>`` as columns.

    The first block is the most significant logical bit.
    """

    blocks: tuple[CodeBlock, ...]
    n: int
    vectors: np.ndarray
    gauge: str = "up"

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


def logical_basis(blocks: Sequence[CodeBlock] = (BLOCK_A,), n: int | None = None, gauge: str = "up") -> LogicalBasis:
    """Build the logical basis for one or more code blocks.

    ``gauge`` selects which copy of the code is used:

    * ``"up"``: every block in its Sz=+1/2 states (the default code).
    * ``"down"``: every block in its Sz=-1/2 states.
    * ``"singlet"``: two blocks whose Sz doublets are coupled to total spin zero,
      i.e. the logical states inside the six-spin S=0 sector.
    """
    blocks = tuple(blocks)
    n = 3 * len(blocks) if n is None else n
    k = len(blocks)
    cols = []
    for label in range(2**k):
        bits = [(label >> (k - 1 - b)) & 1 for b in range(k)]
        if gauge in ("up", "down"):
            up = gauge == "up"
            cols.append(place_blocks([_block_state(x, up) for x in bits], blocks, n))
        elif gauge == "singlet":
            if k != 2:
                raise DomainError("the singlet gauge needs exactly two blocks")
            ud = place_blocks([_block_state(bits[0], True), _block_state(bits[1], False)], blocks, n)
            du = place_blocks([_block_state(bits[0], False), _block_state(bits[1], True)], blocks, n)
            cols.append(_S2 * (ud - du))
        else:
            raise DomainError(f"unknown gauge {gauge!r}")
    vecs = np.array(cols).T
    vecs.setflags(write=False)
    return LogicalBasis(blocks, n, vecs, gauge)


TWO_BLOCK = (BLOCK_A, BLOCK_B)


def logical_action(sequence_unitary: np.ndarray, basis: LogicalBasis) -> BlockDecomposition:
    """Logical matrix of a physical unitary plus its leakage out of the code space."""
    U = np.asarray(sequence_unitary)
    if U.shape != (2**basis.n, 2**basis.n):
        raise DomainError(f"unitary of shape {U.shape} does not act on {basis.n} spins")
    return project_to_block(U, basis.vectors)


_PAULI = (
    np.array([[0, 1], [1, 0]], dtype=np.complex128),
    np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    np.array([[1, 0], [0, -1]], dtype=np.complex128),
)


def bloch_axis(pair: tuple[int, int], block: CodeBlock = BLOCK_A) -> tuple[np.ndarray, float]:
    """Rotation axis and angle-per-unit-duration of an intra-block exchange.

    The logical action of ``exchange_unitary(pair, tau)`` equals
    ``exp(-i * rate * tau * (axis . sigma) / 2)`` up to a global phase. The sign is
    fixed by taking ``rate > 0``.
    """
    a, b = block.local_pair(*pair)
    reg = SpinRegister(3)
    basis = logical_basis((CodeBlock((0, 1, 2)),))
    h = basis.vectors.conj().T @ exchange_hamiltonian(reg, a, b) @ basis.vectors
    h0 = h - 0.5 * np.trace(h) * np.eye(2)
    comps = np.array([0.5 * np.trace(h0 @ p).real for p in _PAULI])
    strength = np.linalg.norm(comps)
    if strength < 1e-14:
        raise DomainError(f"pair {pair} acts trivially on the code")
    # exp(i 2pi tau s m.sigma) = exp(-i (4 pi s) tau (-m).sigma / 2)
    return -comps / strength, float(4 * np.pi * strength)


def measure_singlet_triplet(state: np.ndarray, block: CodeBlock = BLOCK_A, n: int | None = None) -> tuple[float, float]:
    """Probabilities that the block's first two spins are in a singlet / a triplet."""
    psi = np.asarray(state, dtype=np.complex128).ravel()
    n = int(round(np.log2(psi.size))) if n is None else n
    if psi.size != 2**n:
        raise DomainError(f"state of length {psi.size} is not a {n}-spin state")
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1) > NORM_TOL:
        raise DomainError(f"state is not normalised (norm {nrm})")
    swap = swap_operator(SpinRegister(n), block.sites[0], block.sites[1])
    p_singlet = float(np.real(np.vdot(psi, 0.5 * (psi - swap @ psi))))
    p_singlet = min(max(p_singlet, 0.0), 1.0)
    return p_singlet, 1.0 - p_singlet
