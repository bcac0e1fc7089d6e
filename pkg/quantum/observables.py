#!/usr/bin/env python3
"""
Observables - Measurement plans, correlation functions, energies and the
singlet sum-rule correction
"""

from itertools import product
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from quantum.noise import PAULI_I, PAULI_X, PAULI_Y, PAULI_Z, NoiseModel
from quantum.qsim import (DensityState, Unitary, apply_gate, exact_probabilities,
                          sample_counts, u3)

AXES = ("X", "Y", "Z")
PAULI_BY_AXIS = {"I": PAULI_I, "X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}

SINGLE_QUBIT_LABELS = ["X", "Y", "Z"]
TWO_QUBIT_LABELS = [
    "X1", "Y1", "Z1", "X2", "Y2", "Z2",
    "Z1Z2", "X1X2", "Y1Y2", "X1Y2", "Y1X2", "X1Z2", "Z1X2", "Y1Z2", "Z1Y2",
]
SPIN_HALF = 0.5


def correlator_labels(n_qubits: int) -> List[str]:
    if n_qubits == 1:
        return list(SINGLE_QUBIT_LABELS)
    if n_qubits == 2:
        return list(TWO_QUBIT_LABELS)
    raise ValueError(f"Correlators are defined for 1 or 2 qubits, got {n_qubits}")


def pauli_string(label: str, n_qubits: int) -> np.ndarray:
    """Dense operator for a canonical label such as 'X1Y2', 'Z1' or 'Y'"""
    axes = ["I"] * n_qubits
    if n_qubits == 1:
        axes[0] = label
    else:
        for axis, site in zip(label[0::2], label[1::2]):
            axes[int(site) - 1] = axis
    operator = np.ones((1, 1), dtype=complex)
    for axis in axes:
        operator = np.kron(operator, PAULI_BY_AXIS[axis])
    return operator


class Hamiltonian(BaseModel):
    """Single spin in a field (H = B.S) or an exchange-coupled dimer (H = J S1.S2)"""

    model_config = ConfigDict(frozen=True)

    kind: Literal["single_spin", "dimer"]
    field: Tuple[float, float, float] = (1.0, 1.0, 1.0)
    exchange: float = 1.0

    @field_validator("field", mode="before")
    @classmethod
    def _parse_field(cls, value):
        if isinstance(value, str):
            value = [float(part) for part in value.split(",")]
        return value

    @classmethod
    def single_spin(cls, field=(1.0, 1.0, 1.0)) -> "Hamiltonian":
        return cls(kind="single_spin", field=tuple(field))

    @classmethod
    def dimer(cls, exchange: float = 1.0) -> "Hamiltonian":
        return cls(kind="dimer", exchange=exchange)

    @property
    def n_qubits(self) -> int:
        return 1 if self.kind == "single_spin" else 2

    def ground_energy(self) -> float:
        if self.kind == "single_spin":
            return -0.5 * float(np.linalg.norm(self.field))
        return -0.75 * self.exchange if self.exchange > 0 else 0.25 * self.exchange

    def matrix(self) -> np.ndarray:
        """Dense Hamiltonian with S = sigma / 2"""
        if self.kind == "single_spin":
            return 0.5 * sum(b * pauli_string(axis, 1) for b, axis in zip(self.field, AXES))
        return 0.25 * self.exchange * sum(
            pauli_string(f"{axis}1{axis}2", 2) for axis in AXES
        )


class CorrelatorVector:
    """Ordered correlation functions: 3 entries for 1 qubit, 15 for 2"""

    def __init__(self, values: Sequence[float]):
        values = np.asarray(values, dtype=float)
        if values.shape not in ((3,), (15,)):
            raise ValueError(f"Correlator vector must have 3 or 15 entries, got {values.shape}")
        self.values = values
        self.n_qubits = 1 if len(values) == 3 else 2

    @property
    def labels(self) -> List[str]:
        return correlator_labels(self.n_qubits)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, label: str) -> float:
        return float(self.values[self.labels.index(label)])

    def as_dict(self) -> Dict[str, float]:
        return dict(zip(self.labels, (float(v) for v in self.values)))

    def __eq__(self, other) -> bool:
        return isinstance(other, CorrelatorVector) and np.array_equal(self.values, other.values)

    def __repr__(self) -> str:
        return f"CorrelatorVector({np.round(self.values, 4).tolist()})"


# Rotations that map the measured axis onto Z before a computational-basis readout
BASIS_ROTATIONS: Dict[str, Optional[Unitary]] = {
    "X": u3(np.pi / 2, 0.0, np.pi),        # H
    "Y": u3(np.pi / 2, 0.0, np.pi / 2),    # H S^dagger
    "Z": None,
}


class BasisSetting:
    """Per-qubit measurement axis with its pre-measurement rotations"""

    def __init__(self, axes: Sequence[str]):
        axes = tuple(axes)
        if set(axes) - set(AXES):
            raise ValueError(f"Invalid measurement axes {axes}")
        self.axes = axes

    def rotations(self) -> List[Tuple[Unitary, Tuple[int]]]:
        return [
            (BASIS_ROTATIONS[axis], (qubit,))
            for qubit, axis in enumerate(self.axes)
            if BASIS_ROTATIONS[axis] is not None
        ]

    def __eq__(self, other) -> bool:
        return isinstance(other, BasisSetting) and self.axes == other.axes

    def __repr__(self) -> str:
        return "".join(self.axes)


def measurement_plan(n_qubits: int) -> List[BasisSetting]:
    if n_qubits not in (1, 2):
        raise ValueError(f"Measurement plans exist for 1 or 2 qubits, got {n_qubits}")
    return [BasisSetting(axes) for axes in product(AXES, repeat=n_qubits)]


def _setting_probabilities(state: DensityState, setting: BasisSetting,
                           shots: Optional[int], noise: NoiseModel,
                           rng: Optional[np.random.Generator],
                           basis_noise: bool) -> np.ndarray:
    rotation_noise = noise if basis_noise else None
    rotated = state
    for gate, targets in setting.rotations():
        rotated = apply_gate(rotated, gate, targets, rotation_noise)
    if shots is None:
        return exact_probabilities(rotated, noise)
    if rng is None:
        raise ValueError("A random generator is required for shot-based estimation")
    return sample_counts(rotated, shots, noise, rng).frequencies()


def estimate_correlators(state: DensityState, shots: Optional[int] = None,
                         noise: Optional[NoiseModel] = None,
                         rng: Optional[np.random.Generator] = None,
                         basis_noise: bool = False) -> CorrelatorVector:
    """Measure every basis setting and assemble the canonical correlator vector.

    shots=None means exact (infinite-shot) probabilities. Two-qubit singles are
    the mean of their three marginals.
    """
    if shots is not None and shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    if noise is None:
        noise = NoiseModel.off()
    if state.n_qubits not in (1, 2):
        raise ValueError(f"Correlators are defined for 1 or 2 qubits, got {state.n_qubits}")

    if state.n_qubits == 1:
        values = []
        for setting in measurement_plan(1):
            p = _setting_probabilities(state, setting, shots, noise, rng, basis_noise)
            values.append(p[0] - p[1])
        return CorrelatorVector(values)

    singles = {f"{axis}{site}": [] for site in (1, 2) for axis in AXES}
    pairs = {}
    for setting in measurement_plan(2):
        a, b = setting.axes
        p00, p01, p10, p11 = _setting_probabilities(state, setting, shots, noise, rng, basis_noise)
        pairs[f"{a}1{b}2"] = p00 + p11 - p01 - p10
        singles[f"{a}1"].append(p00 + p01 - p10 - p11)
        singles[f"{b}2"].append(p00 + p10 - p01 - p11)

    values = []
    for label in TWO_QUBIT_LABELS:
        if label in singles:
            values.append(float(np.mean(singles[label])))
        else:
            values.append(pairs[label])
    return CorrelatorVector(np.clip(values, -1.0, 1.0))


def exact_correlators(state: DensityState) -> CorrelatorVector:
    """Tr(rho P) for every canonical Pauli string"""
    labels = correlator_labels(state.n_qubits)
    return CorrelatorVector([state.expectation(pauli_string(l, state.n_qubits)) for l in labels])


def energy(h: Hamiltonian, c: CorrelatorVector) -> float:
    if c.n_qubits != h.n_qubits:
        raise ValueError(
            f"Correlator layout for {c.n_qubits} qubit(s) does not match {h.kind} Hamiltonian"
        )
    if h.kind == "single_spin":
        return 0.5 * float(np.dot(h.field, c.values))
    return h.exchange * spin_dot(c)


def spin_dot(c: CorrelatorVector) -> float:
    """<S1.S2> = (<X1X2> + <Y1Y2> + <Z1Z2>) / 4"""
    if c.n_qubits != 2:
        raise ValueError("spin_dot needs the 15-entry two-qubit layout")
    return 0.25 * (c["X1X2"] + c["Y1Y2"] + c["Z1Z2"])


class CorrectionUndefinedError(ValueError):
    """Local moment correction requested for a state without AFM pair correlation"""


class CorrectionResult(BaseModel):
    multiplier: float
    spin_dot: float
    corrected_spin_dot: float
    corrected_energy: float


def mean_local_moment(nonlocal_sum: float, n_spins: int) -> float:
    """(1/N) sum_i <S_i^2> inferred from the singlet sum rule,
    given sum_{i != j} <S_i.S_j>"""
    if n_spins < 2 or n_spins % 2:
        raise ValueError(f"The sum rule holds for an even number of spins, got {n_spins}")
    return -nonlocal_sum / n_spins


def local_spin_correction(c: CorrelatorVector, spin: float = SPIN_HALF,
                          exchange: float = 1.0) -> CorrectionResult:
    """Rescale the dimer pair correlator by X = S(S+1) / mean local moment"""
    sd = spin_dot(c)
    if sd >= 0:
        raise CorrectionUndefinedError(
            f"<S1.S2> = {sd:.6f} >= 0: correction is only defined for singlet-like states"
        )
    moment = mean_local_moment(2.0 * sd, n_spins=2)
    multiplier = spin * (spin + 1.0) / moment
    corrected = multiplier * sd
    return CorrectionResult(
        multiplier=multiplier,
        spin_dot=sd,
        corrected_spin_dot=corrected,
        corrected_energy=exchange * corrected,
    )


def sum_rule_residual(c: CorrelatorVector, spin: float = SPIN_HALF) -> float:
    """sum_ij <S_i.S_j> with exact local moments S(S+1); zero for the singlet"""
    return 2.0 * spin * (spin + 1.0) + 2.0 * spin_dot(c)
