#!/usr/bin/env python3
"""
Workflow Episodes - Runs single circuits and shapes their result rows
"""

from typing import Any, Dict, Optional, Tuple

import numpy as np

from agents.circuit_environment import CircuitEpisode
from agents.vqe_solver import SINGLET_ANGLES, prepare_ansatz
from quantum.noise import NoiseModel
from quantum.observables import (CorrectionUndefinedError, Hamiltonian, energy,
                                 estimate_correlators, local_spin_correction)
from quantum.qsim import DensityState, apply_gate, u3

NOT_CORRECTED = "n/a"


def ground_state_angles(field: Tuple[float, float, float]) -> Tuple[float, float, float]:
    """U3 angles that point the spin against the field (the single-spin ground state)"""
    bx, by, bz = field
    norm = float(np.linalg.norm(field))
    if norm == 0.0:
        return 0.0, 0.0, 0.0
    theta = float(np.arccos(np.clip(-bz / norm, -1.0, 1.0)))
    phi = float(np.arctan2(-by, -bx))
    return theta, phi, 0.0


class WorkflowEpisodes:
    """Runs single circuits against the configured problem"""

    def __init__(self, workflow_manager):
        self.workflow = workflow_manager

    def prepare_exact_circuit(self, hamiltonian: Hamiltonian,
                              noise: Optional[NoiseModel]) -> DensityState:
        """The known optimal circuit: one U3 for the single spin, the singlet circuit for the dimer"""
        if hamiltonian.kind == "single_spin":
            state = DensityState.zero(1)
            return apply_gate(state, u3(*ground_state_angles(hamiltonian.field)), (0,), noise)
        return prepare_ansatz(SINGLET_ANGLES, noise)

    def run_exact_circuit(self, run: int, hamiltonian: Hamiltonian, noise: Optional[NoiseModel],
                          rng: np.random.Generator) -> Dict[str, Any]:
        config = self.workflow.config
        state = self.prepare_exact_circuit(hamiltonian, noise)
        s = estimate_correlators(state, config.shots, noise, rng, config.basis_noise)
        row = {"run": run, "energy": energy(hamiltonian, s)}
        row.update(s.as_dict())
        return row

    def evaluation_row(self, row: Dict[str, Any], episode: CircuitEpisode,
                       correct: bool = False) -> Dict[str, Any]:
        """Evaluation metrics plus the final correlators; optionally the corrected energy"""
        shaped = dict(row)
        shaped.update(episode.s.as_dict())
        if correct:
            try:
                result = local_spin_correction(episode.s, exchange=self.workflow.config.exchange)
                shaped["corrected_energy"] = result.corrected_energy
            except CorrectionUndefinedError:
                shaped["corrected_energy"] = NOT_CORRECTED
        return shaped

    def step_row(self, epoch: int, index: int, episode: CircuitEpisode) -> Dict[str, Any]:
        row = {
            "epoch": epoch,
            "episode": index,
            "step": episode.length,
            "action": episode.labels[-1],
            "energy": episode.energy,
            "reward": episode.rewards[-1],
        }
        row.update(episode.s.as_dict())
        return row
