#!/usr/bin/env python3
"""
Quantum Package - Density-matrix simulator, noise channels and observables
"""

from .noise import NoiseModel, BUILTIN_PROFILES, load_noise_profile
from .qsim import (DensityState, Unitary, MeasurementOutcome, u3, cnot, identity,
                   apply_gate, exact_probabilities, sample_counts)
from .observables import (Hamiltonian, CorrelatorVector, BasisSetting, CorrectionResult,
                          CorrectionUndefinedError, measurement_plan, estimate_correlators,
                          energy, spin_dot, local_spin_correction, sum_rule_residual)

__all__ = [
    'NoiseModel',
    'BUILTIN_PROFILES',
    'load_noise_profile',
    'DensityState',
    'Unitary',
    'MeasurementOutcome',
    'u3',
    'cnot',
    'identity',
    'apply_gate',
    'exact_probabilities',
    'sample_counts',
    'Hamiltonian',
    'CorrelatorVector',
    'BasisSetting',
    'CorrectionResult',
    'CorrectionUndefinedError',
    'measurement_plan',
    'estimate_correlators',
    'energy',
    'spin_dot',
    'local_spin_correction',
    'sum_rule_residual'
]
