"""
Tests for the density-matrix simulator.

Tests:
    - Gate library and qubit ordering
    - Pure-state oracle on random circuits
    - Target validation
    - Readout and sampling
"""
import numpy as np
import pytest

from quantum.noise import NoiseModel
from quantum.qsim import (DensityState, MeasurementOutcome, apply_gate, cnot, embed_operator,
                          exact_probabilities, hadamard, identity, sample_counts, u3)

SQRT2_INV = 1 / np.sqrt(2)


# =============================================================================
# Gate Library
# =============================================================================

def test_u3_standard_matrix():
    theta, phi, lam = 0.3, 1.1, -0.7
    expected = np.array([
        [np.cos(theta / 2), -np.exp(1j * lam) * np.sin(theta / 2)],
        [np.exp(1j * phi) * np.sin(theta / 2), np.exp(1j * (phi + lam)) * np.cos(theta / 2)],
    ])
    np.testing.assert_allclose(u3(theta, phi, lam).matrix, expected, atol=1e-15)


@pytest.mark.parametrize("gate", [u3(0.4, 2.0, 5.1), identity(), hadamard(), cnot()])
def test_gates_are_unitary(gate):
    assert gate.is_unitary()


def test_u3_pi_is_bit_flip():
    state = apply_gate(DensityState.zero(1), u3(np.pi, 0.0, 0.0), (0,))
    np.testing.assert_allclose(np.real(np.diag(state.rho)), [0.0, 1.0], atol=1e-15)


def test_qubit_one_is_most_significant():
    """X on qubit 1 of |00> gives |10>, basis index 2"""
    state = apply_gate(DensityState.zero(2), u3(np.pi, 0.0, 0.0), (0,))
    assert np.real(state.rho[2, 2]) == pytest.approx(1.0)


def test_cnot_control_is_first_target():
    flipped = apply_gate(DensityState.zero(2), u3(np.pi, 0.0, 0.0), (0,))
    state = apply_gate(flipped, cnot(), (0, 1))
    assert np.real(state.rho[3, 3]) == pytest.approx(1.0)

    reversed_state = apply_gate(flipped, cnot(), (1, 0))
    assert np.real(reversed_state.rho[2, 2]) == pytest.approx(1.0)


def test_bell_state():
    state = apply_gate(DensityState.zero(2), hadamard(), (0,))
    state = apply_gate(state, cnot(), (0, 1))
    expected = np.array([SQRT2_INV, 0, 0, SQRT2_INV], dtype=complex)
    np.testing.assert_allclose(state.rho, np.outer(expected, expected.conj()), atol=1e-15)


def test_embed_operator_on_second_qubit():
    x = np.array([[0, 1], [1, 0]])
    np.testing.assert_allclose(embed_operator(x, (1,), 2), np.kron(np.eye(2), x))


# =============================================================================
# Pure-State Oracle
# =============================================================================

def _random_circuit(rng, n_gates):
    ops = []
    for _ in range(n_gates):
        if rng.random() < 0.3:
            targets = (0, 1) if rng.random() < 0.5 else (1, 0)
            ops.append((cnot(), targets))
        else:
            angles = rng.uniform(0, 2 * np.pi, size=3)
            ops.append((u3(*angles), (int(rng.integers(2)),)))
    return ops


def test_density_evolution_matches_statevector_on_random_circuits():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        ops = _random_circuit(rng, int(rng.integers(1, 21)))
        state = DensityState.zero(2)
        psi = np.zeros(4, dtype=complex)
        psi[0] = 1.0
        for gate, targets in ops:
            state = apply_gate(state, gate, targets)
            psi = embed_operator(gate.matrix, targets, 2) @ psi
        np.testing.assert_allclose(state.rho, np.outer(psi, psi.conj()), atol=1e-12)
        assert state.is_valid(check_psd=True)


def test_apply_gate_keeps_input_state():
    state = DensityState.zero(1)
    apply_gate(state, hadamard(), (0,))
    assert np.real(state.rho[0, 0]) == 1.0


# =============================================================================
# Target Validation
# =============================================================================

def test_out_of_range_target_raises():
    with pytest.raises(IndexError):
        apply_gate(DensityState.zero(2), hadamard(), (2,))


def test_duplicate_targets_raise():
    with pytest.raises(IndexError):
        apply_gate(DensityState.zero(2), cnot(), (1, 1))


def test_arity_mismatch_raises():
    with pytest.raises(ValueError):
        apply_gate(DensityState.zero(2), cnot(), (0,))


def test_invalid_density_shape_raises():
    with pytest.raises(ValueError):
        DensityState(np.eye(3) / 3)


# =============================================================================
# Readout and Sampling
# =============================================================================

def test_readout_confusion_on_zero_state():
    noise = NoiseModel(readout_flip_0to1=0.1, readout_flip_1to0=0.2)
    probs = exact_probabilities(DensityState.zero(1), noise)
    np.testing.assert_allclose(probs, [0.9, 0.1])


def test_two_qubit_readout_is_product():
    noise = NoiseModel(readout_flip_0to1=0.1)
    probs = exact_probabilities(DensityState.zero(2), noise)
    np.testing.assert_allclose(probs, [0.81, 0.09, 0.09, 0.01])


def test_sampling_is_deterministic_for_a_seed():
    state = apply_gate(DensityState.zero(1), hadamard(), (0,))
    a = sample_counts(state, 1024, None, np.random.default_rng(5))
    b = sample_counts(state, 1024, None, np.random.default_rng(5))
    assert a.counts == b.counts
    assert sum(a.counts.values()) == 1024


def test_sampling_distribution_matches_probabilities():
    state = apply_gate(DensityState.zero(1), u3(np.pi / 3, 0.0, 0.0), (0,))
    outcome = sample_counts(state, 200_000, None, np.random.default_rng(11))
    np.testing.assert_allclose(outcome.frequencies(), exact_probabilities(state), atol=5e-3)


def test_sampling_needs_positive_shots():
    with pytest.raises(ValueError):
        sample_counts(DensityState.zero(1), 0, None, np.random.default_rng(0))


def test_outcome_keys_are_bitstrings():
    state = apply_gate(DensityState.zero(2), hadamard(), (0,))
    outcome = sample_counts(state, 100, None, np.random.default_rng(3))
    assert set(outcome.counts) <= {"00", "10"}
    with pytest.raises(ValueError):
        MeasurementOutcome({"2": 100}, 100, 1)
