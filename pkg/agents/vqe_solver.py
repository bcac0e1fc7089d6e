#!/usr/bin/env python3
"""
VQE Solver - Variational baseline for the dimer: U3 x U3 then CNOT, plain
gradient descent with periodic step-size calibration
"""

from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

from quantum.noise import NoiseModel
from quantum.observables import Hamiltonian, energy, estimate_correlators
from quantum.qsim import DensityState, apply_gate, cnot, embed_operator, u3
from tools.gate_actions import random_u3_angles

N_PARAMS = 6
# The Hadamard-like rotation sits on qubit 2, which therefore controls the CNOT
ANSATZ_CNOT_TARGETS = (1, 0)
SINGLET_ANGLES = (np.pi, 0.0, 0.0, -np.pi / 2, 0.0, 0.0)
CALIBRATION_STEPS = (0.1, 0.5, 1.0, 2.0)
UNCAPPED_STEPS = (0.1, 0.5, 1.0, 2.0, 4.0, 8.0)


class VqeConfig(BaseModel):
    iterations: int = Field(500, ge=0)
    calibration_interval: int = Field(20, gt=0)
    fd_step: float = Field(0.1, gt=0.0)
    initial_alpha: float = Field(0.5, gt=0.0)
    max_alpha: float = Field(2.0, gt=0.0)
    cap_alpha: bool = True
    shots: Optional[int] = Field(None, gt=0)
    basis_noise: bool = False
    seed: int = 0


class VqeState:
    """Current angles, step size and iteration counter"""

    def __init__(self, theta: Sequence[float], alpha: float, iteration: int = 0):
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (N_PARAMS,):
            raise ValueError(f"The ansatz takes {N_PARAMS} angles, got {theta.shape}")
        self.theta = theta
        self.alpha = alpha
        self.iteration = iteration


def prepare_ansatz(theta: Sequence[float], noise: Optional[NoiseModel] = None) -> DensityState:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (N_PARAMS,):
        raise ValueError(f"The ansatz takes {N_PARAMS} angles, got {theta.shape}")
    state = DensityState.zero(2)
    state = apply_gate(state, u3(*theta[:3]), (0,), noise)
    state = apply_gate(state, u3(*theta[3:]), (1,), noise)
    return apply_gate(state, cnot(), ANSATZ_CNOT_TARGETS, noise)


def ansatz_energy(theta: Sequence[float], h: Hamiltonian, noise: Optional[NoiseModel] = None,
                  shots: Optional[int] = None, rng: Optional[np.random.Generator] = None,
                  basis_noise: bool = False) -> float:
    state = prepare_ansatz(theta, noise)
    return energy(h, estimate_correlators(state, shots, noise, rng, basis_noise))


def gradient(theta: Sequence[float], h: Hamiltonian, noise: Optional[NoiseModel] = None,
             shots: Optional[int] = None, rng: Optional[np.random.Generator] = None,
             fd_step: float = 0.1, basis_noise: bool = False) -> np.ndarray:
    """Central finite differences, one pair of energy evaluations per angle"""
    theta = np.asarray(theta, dtype=float)
    grad = np.zeros(N_PARAMS)
    for k in range(N_PARAMS):
        shift = np.zeros(N_PARAMS)
        shift[k] = fd_step
        e_plus = ansatz_energy(theta + shift, h, noise, shots, rng, basis_noise)
        e_minus = ansatz_energy(theta - shift, h, noise, shots, rng, basis_noise)
        grad[k] = (e_plus - e_minus) / (2.0 * fd_step)
    return grad


def _u3_derivatives(theta: float, phi: float, lam: float) -> List[np.ndarray]:
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    ep, el, epl = np.exp(1j * phi), np.exp(1j * lam), np.exp(1j * (phi + lam))
    d_theta = 0.5 * np.array([[-s, -el * c], [ep * c, -epl * s]])
    d_phi = np.array([[0, 0], [1j * ep * s, 1j * epl * c]])
    d_lam = np.array([[0, -1j * el * s], [0, 1j * epl * c]])
    return [d_theta, d_phi, d_lam]


def analytic_gradient(theta: Sequence[float], h: Hamiltonian) -> np.ndarray:
    """Noiseless dE/dtheta_k = 2 Re <psi|H|d_k psi> on the dense pure state"""
    theta = np.asarray(theta, dtype=float)
    zero = np.zeros(4, dtype=complex)
    zero[0] = 1.0
    u_a, u_b = u3(*theta[:3]).matrix, u3(*theta[3:]).matrix
    entangler = embed_operator(cnot().matrix, ANSATZ_CNOT_TARGETS, 2)
    psi = entangler @ np.kron(u_a, u_b) @ zero
    h_psi = h.matrix() @ psi

    grad = np.zeros(N_PARAMS)
    for k, d_a in enumerate(_u3_derivatives(*theta[:3])):
        d_psi = entangler @ np.kron(d_a, u_b) @ zero
        grad[k] = 2.0 * np.real(np.vdot(h_psi, d_psi))
    for k, d_b in enumerate(_u3_derivatives(*theta[3:])):
        d_psi = entangler @ np.kron(u_a, d_b) @ zero
        grad[3 + k] = 2.0 * np.real(np.vdot(h_psi, d_psi))
    return grad


def calibrate_step(theta: np.ndarray, grad: np.ndarray, h: Hamiltonian,
                   noise: Optional[NoiseModel], config: VqeConfig,
                   rng: np.random.Generator) -> float:
    """Line search along -grad over the candidate steps; keeps the lowest-energy one"""
    candidates = CALIBRATION_STEPS if config.cap_alpha else UNCAPPED_STEPS
    energies = [
        ansatz_energy(theta - a * grad, h, noise, config.shots, rng, config.basis_noise)
        for a in candidates
    ]
    alpha = float(candidates[int(np.argmin(energies))])
    if config.cap_alpha:
        alpha = min(alpha, config.max_alpha)
    return alpha


def random_initial_angles(rng: np.random.Generator) -> np.ndarray:
    return np.array(random_u3_angles(rng) + random_u3_angles(rng))


def run_vqe(config: VqeConfig, h: Hamiltonian, noise: Optional[NoiseModel] = None,
            theta0: Optional[Sequence[float]] = None) -> List[Dict[str, Any]]:
    """theta_{k+1} = theta_k - alpha_k g_k, recalibrating alpha every interval"""
    rng = np.random.default_rng(config.seed)
    theta = random_initial_angles(rng) if theta0 is None else np.asarray(theta0, dtype=float)
    alpha = min(config.initial_alpha, config.max_alpha) if config.cap_alpha else config.initial_alpha
    vqe = VqeState(theta, alpha)

    def record(state: VqeState) -> Dict[str, Any]:
        e = ansatz_energy(state.theta, h, noise, config.shots, rng, config.basis_noise)
        return {"iteration": state.iteration, "alpha": state.alpha,
                "theta": state.theta.copy(), "energy": e}

    trajectory = [record(vqe)]
    for k in range(config.iterations):
        grad = gradient(vqe.theta, h, noise, config.shots, rng, config.fd_step, config.basis_noise)
        if k % config.calibration_interval == 0:
            vqe.alpha = calibrate_step(vqe.theta, grad, h, noise, config, rng)
        vqe.theta = vqe.theta - vqe.alpha * grad
        vqe.iteration = k + 1
        trajectory.append(record(vqe))
    return trajectory


def trajectory_rows(trajectory: List[Dict[str, Any]]) -> List[Dict[str, float]]:
    """Flatten theta into theta_0..theta_5 columns"""
    rows = []
    for point in trajectory:
        row = {"iteration": point["iteration"], "alpha": point["alpha"]}
        row.update({f"theta_{i}": float(v) for i, v in enumerate(point["theta"])})
        row["energy"] = point["energy"]
        rows.append(row)
    return rows
