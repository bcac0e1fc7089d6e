#!/usr/bin/env python3
"""
Circuit Environment - Grows a quantum circuit gate by gate and scores it by energy
"""

from typing import List, Optional, Tuple

import numpy as np

from quantum.noise import NoiseModel
from quantum.observables import CorrelatorVector, Hamiltonian, energy, estimate_correlators
from quantum.qsim import DensityState, apply_gate, u3
from tools.gate_actions import ActionSet, random_u3_angles


class EpisodeCompleteError(RuntimeError):
    """A gate was requested after the circuit reached num_gates"""


class CircuitEpisode:
    """Circuit under construction: current register state and trajectory"""

    def __init__(self, state: DensityState, s: CorrelatorVector, energy_value: float):
        self.state = state
        self.s = s
        self.energy = energy_value
        self.initial_energy = energy_value
        self.actions: List[int] = []
        self.labels: List[str] = []
        self.energies: List[float] = [energy_value]
        self.rewards: List[float] = []

    @property
    def length(self) -> int:
        return len(self.actions)

    @property
    def min_energy(self) -> float:
        return min(self.energies)

    @property
    def total_reward(self) -> float:
        return float(sum(self.rewards))


class CircuitEnvironment:
    """Environment for one Hamiltonian, action set and measurement mode"""

    def __init__(self, hamiltonian: Hamiltonian, action_set: ActionSet, num_gates: int,
                 noise: Optional[NoiseModel] = None, shots: Optional[int] = 1024,
                 basis_noise: bool = False):
        if action_set.n_qubits != hamiltonian.n_qubits:
            raise ValueError(
                f"Action set for {action_set.n_qubits} qubit(s) does not match "
                f"{hamiltonian.kind} Hamiltonian"
            )
        if num_gates < 1:
            raise ValueError(f"num_gates must be positive, got {num_gates}")
        self.hamiltonian = hamiltonian
        self.action_set = action_set
        self.num_gates = num_gates
        self.noise = noise if noise is not None else NoiseModel.off()
        self.shots = shots
        self.basis_noise = basis_noise

    @property
    def n_qubits(self) -> int:
        return self.hamiltonian.n_qubits

    def measure(self, state: DensityState,
                rng: Optional[np.random.Generator]) -> Tuple[CorrelatorVector, float]:
        s = estimate_correlators(state, self.shots, self.noise, rng, self.basis_noise)
        return s, energy(self.hamiltonian, s)

    def prepare_initial_state(self, rng: np.random.Generator,
                              angles: Optional[Tuple[float, float, float]] = None) -> DensityState:
        """Random U3 on qubit 1; for two qubits qubit 2 is set antiparallel on the Bloch sphere"""
        theta, phi, lam = random_u3_angles(rng) if angles is None else angles
        state = DensityState.zero(self.n_qubits)
        state = apply_gate(state, u3(theta, phi, lam), (0,), self.noise)
        if self.n_qubits == 2:
            state = apply_gate(state, u3(np.pi - theta, phi + np.pi, lam), (1,), self.noise)
        return state

    def init_episode(self, rng: np.random.Generator,
                     angles: Optional[Tuple[float, float, float]] = None) -> CircuitEpisode:
        state = self.prepare_initial_state(rng, angles)
        s, e = self.measure(state, rng)
        return CircuitEpisode(state, s, e)

    def step(self, episode: CircuitEpisode, action: int,
             rng: Optional[np.random.Generator] = None) -> Tuple[CorrelatorVector, float, float]:
        """Append the action's gate, re-measure, and return (s_next, r, E_next)"""
        if episode.length >= self.num_gates:
            raise EpisodeCompleteError(
                f"Circuit already holds {self.num_gates} gates; start a new episode"
            )
        gate_action = self.action_set[action]
        state = episode.state
        for gate, targets in gate_action.operations(self.n_qubits, rng):
            state = apply_gate(state, gate, targets, self.noise)
        s_next, e_next = self.measure(state, rng)
        reward = episode.energy - e_next

        episode.state = state
        episode.s = s_next
        episode.energy = e_next
        episode.actions.append(action)
        episode.labels.append(gate_action.label)
        episode.energies.append(e_next)
        episode.rewards.append(reward)
        return s_next, reward, e_next

    def is_terminal(self, episode: CircuitEpisode) -> bool:
        return episode.length >= self.num_gates
