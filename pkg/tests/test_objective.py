import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracle
from exchange_qc.encoding import TWO_BLOCK, logical_basis
from exchange_qc.errors import DomainError
from exchange_qc.gate_equivalence import CNOT, SWAP, raw_invariants
from exchange_qc.synthesis.cnot import SERIAL_CNOT_19, nearest_neighbour_pattern
from exchange_qc.synthesis.objective import SynthesisObjective, analytic_gradient, evaluate_objective
from exchange_qc.synthesis.sequence import PulseSequence

P19 = nearest_neighbour_pattern(SERIAL_CNOT_19)


def seq19(times):
    return PulseSequence.from_pattern("serial", 6, P19, times)


def brute_force_f(times, lam=1.0):
    """Objective from the full 64-dim product of scipy exponentials."""
    U = oracle.evolve([[(i, j, t)] for ((i, j),), t in zip(P19, times)], 6)
    from exchange_qc.sectors import sector_basis

    C = sector_basis(6, 1, 1).columns
    L = oracle.code_states_two_blocks()
    comp = C - L @ (L.conj().T @ C)
    # orthonormal complement of the code space inside the sector
    q, s, _ = np.linalg.svd(comp)
    comp = q[:, : int(np.sum(s > 1e-8))]
    B = L.conj().T @ U @ L
    leak = np.linalg.norm(comp.conj().T @ U @ L)
    m = np.array(raw_invariants(B)) - np.array(raw_invariants(CNOT))
    return float(np.sum(np.abs(m) ** 2) + lam * leak**2), leak


def test_identity_gives_invariant_distance():
    f, leak = evaluate_objective(seq19(np.zeros(19)), SynthesisObjective())
    assert f == pytest.approx(5.0, abs=1e-12)
    assert leak < 1e-12


def test_intra_block_only_is_leak_free():
    seq = PulseSequence.serial([(0, 1, 0.3), (1, 2, 0.2), (4, 5, 0.6)], 6)
    f, leak = evaluate_objective(seq, SynthesisObjective())
    assert leak < 1e-12 and f > 0.1


@settings(max_examples=10)
@given(seed=st.integers(0, 2**32 - 1))
def test_matches_brute_force(seed):
    times = np.random.default_rng(seed).random(19)
    f, leak = evaluate_objective(seq19(times), SynthesisObjective())
    f_ref, leak_ref = brute_force_f(times)
    assert f == pytest.approx(f_ref, rel=1e-10, abs=1e-12)
    assert leak == pytest.approx(leak_ref, rel=1e-10, abs=1e-12)


@settings(max_examples=10)
@given(seed=st.integers(0, 2**32 - 1), shifts=st.lists(st.integers(-3, 3), min_size=19, max_size=19))
def test_whole_periods_do_not_change_f(seed, shifts):
    times = np.random.default_rng(seed).random(19)
    obj = SynthesisObjective()
    f0, l0 = evaluate_objective(seq19(times), obj)
    f1, l1 = evaluate_objective(seq19(times + np.array(shifts)), obj)
    assert abs(f0 - f1) < 1e-12 and abs(l0 - l1) < 1e-12
    f2, _ = evaluate_objective(seq19(times).canonical(), obj)
    assert abs(f0 - f2) < 1e-12


def test_leakage_weight_scales_penalty():
    times = np.random.default_rng(3).random(19)
    f1, leak = evaluate_objective(seq19(times), SynthesisObjective(leakage_weight=1.0))
    f0, _ = evaluate_objective(seq19(times), SynthesisObjective(leakage_weight=0.0))
    assert f1 - f0 == pytest.approx(leak**2, rel=1e-10)


def _central_difference(seq, obj, h=1e-6):
    t = seq.times
    out = np.empty_like(t)
    for k in range(len(t)):
        e = np.zeros_like(t)
        e[k] = h
        out[k] = (evaluate_objective(seq.with_times(t + e), obj)[0] - evaluate_objective(seq.with_times(t - e), obj)[0]) / (2 * h)
    return out


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_gradient_matches_finite_differences(seed):
    obj = SynthesisObjective()
    seq = seq19(np.random.default_rng(seed).random(19))
    g, fd = analytic_gradient(seq, obj), _central_difference(seq, obj)
    assert np.max(np.abs(g - fd) / np.maximum(np.abs(fd), 1.0)) < 1e-5


def test_gradient_parallel_overlapping_steps():
    obj = SynthesisObjective()
    pattern = (((1, 2), (2, 3), (3, 4)), ((0, 1), (4, 5)), ((2, 3), (1, 2)))
    seq = PulseSequence.from_pattern("parallel-1d", 6, pattern, np.random.default_rng(9).random(7))
    g, fd = analytic_gradient(seq, obj), _central_difference(seq, obj)
    assert np.max(np.abs(g - fd) / np.maximum(np.abs(fd), 1.0)) < 1e-5


def test_gradient_vanishes_at_zero_times():
    # every component, mirrored steps included, is exactly zero at the identity
    g = analytic_gradient(seq19(np.zeros(19)), SynthesisObjective())
    assert np.max(np.abs(g)) < 1e-12


def test_subsystem_objective_has_two_sectors():
    obj = SynthesisObjective(subsystem=True)
    assert len(obj.models) == 2
    times = np.random.default_rng(4).random(19)
    f_sub, _ = evaluate_objective(seq19(times), obj)
    f_one, _ = evaluate_objective(seq19(times), SynthesisObjective())
    assert f_sub > f_one
    seq = seq19(times)
    g, fd = analytic_gradient(seq, obj), _central_difference(seq, obj)
    assert np.max(np.abs(g - fd) / np.maximum(np.abs(fd), 1.0)) < 1e-5


def test_exact_mode_single_block():
    obj = SynthesisObjective(target=np.diag([1, -1]).astype(complex), equivalence="exact", blocks=TWO_BLOCK[:1])
    seq = PulseSequence.serial([(0, 1, 0.5)], 3)
    f, leak = evaluate_objective(seq, obj)
    assert f < 1e-24 and leak < 1e-12


def test_invalid_objectives():
    with pytest.raises(DomainError):
        SynthesisObjective(target=2 * CNOT)
    with pytest.raises(DomainError):
        SynthesisObjective(leakage_weight=np.inf)
    with pytest.raises(DomainError):
        SynthesisObjective(equivalence="approximate")
    with pytest.raises(DomainError):
        evaluate_objective(PulseSequence.serial([(0, 1, 0.1)], 3), SynthesisObjective(target=SWAP))


def test_code_space_matches_oracle():
    assert np.allclose(logical_basis(TWO_BLOCK).vectors, oracle.code_states_two_blocks(), atol=1e-15)
