#!/usr/bin/env python3
"""
Gate actions - The discrete gate catalog the circuit-building agent picks from
"""

from typing import List, Optional, Sequence, Tuple

import numpy as np

from quantum.qsim import Unitary, cnot, identity, u3

DELTA_SINGLE_SPIN = 0.5
DELTA_DIMER = 1.0

# Action kinds
IDLE = "idle"
ROTATION = "rotation"
RANDOM_ROTATION = "random"
ENTANGLER = "cnot"


class GateAction:
    """One element of the action set: a label and its unitary realization"""

    def __init__(self, label: str, kind: str, qubit: Optional[int] = None,
                 params: Tuple[float, float, float] = (0.0, 0.0, 0.0),
                 control: Optional[int] = None, target: Optional[int] = None):
        self.label = label
        self.kind = kind
        self.qubit = qubit
        self.params = params
        self.control = control
        self.target = target

    def operations(self, n_qubits: int,
                   rng: Optional[np.random.Generator] = None) -> List[Tuple[Unitary, Tuple[int, ...]]]:
        """(gate, targets) pairs that realize this action on an n-qubit register"""
        if self.kind == IDLE:
            return [(identity(), (q,)) for q in range(n_qubits)]
        if self.kind == ROTATION:
            return [(u3(*self.params), (self.qubit,))]
        if self.kind == RANDOM_ROTATION:
            if rng is None:
                raise ValueError(f"Action '{self.label}' needs a random generator")
            theta, phi, lam = random_u3_angles(rng)
            return [(u3(theta, phi, lam), (self.qubit,))]
        if self.kind == ENTANGLER:
            return [(cnot(), (self.control, self.target))]
        raise ValueError(f"Unknown action kind '{self.kind}'")

    @property
    def is_entangling(self) -> bool:
        return self.kind == ENTANGLER

    def __repr__(self) -> str:
        return f"GateAction({self.label})"


class ActionSet:
    """Ordered gate catalog with its elementary angle"""

    def __init__(self, actions: Sequence[GateAction], delta: float, n_qubits: int):
        if not actions:
            raise ValueError("An action set needs at least one action")
        labels = [a.label for a in actions]
        if len(set(labels)) != len(labels):
            raise ValueError(f"Duplicate action labels in {labels}")
        self.actions = list(actions)
        self.delta = delta
        self.n_qubits = n_qubits

    def __len__(self) -> int:
        return len(self.actions)

    def __getitem__(self, index: int) -> GateAction:
        return self.actions[index]

    @property
    def labels(self) -> List[str]:
        return [a.label for a in self.actions]

    def entangling_indices(self) -> List[int]:
        return [i for i, a in enumerate(self.actions) if a.is_entangling]


def random_u3_angles(rng: np.random.Generator) -> Tuple[float, float, float]:
    """theta in [0, pi], phi and lambda in [0, 2pi)"""
    theta = rng.uniform(0.0, np.pi)
    phi = rng.uniform(0.0, 2.0 * np.pi)
    lam = rng.uniform(0.0, 2.0 * np.pi)
    return float(theta), float(phi), float(lam)


def _rotation_actions(delta: float, qubit: int, suffix: str) -> List[GateAction]:
    """Z and Y rotations by +-delta and +-delta/2, U3(0, a, 0) and U3(a, 0, 0)"""
    actions = []
    for fraction, tag in ((1.0, "d"), (0.5, "d/2")):
        angle = delta * fraction
        for sign, mark in ((1.0, "+"), (-1.0, "-")):
            actions.append(GateAction(f"Z{mark}{tag}{suffix}", ROTATION, qubit,
                                      (0.0, sign * angle, 0.0)))
        for sign, mark in ((1.0, "+"), (-1.0, "-")):
            actions.append(GateAction(f"Y{mark}{tag}{suffix}", ROTATION, qubit,
                                      (sign * angle, 0.0, 0.0)))
    return actions


def get_single_qubit_actions(delta: float = DELTA_SINGLE_SPIN,
                             include_random_rotation: bool = False) -> ActionSet:
    """IDLE, Z+-d, Y+-d, Z+-d/2, Y+-d/2 (9 actions) for the single-spin agent"""
    actions = [GateAction("I", IDLE)]
    actions.extend(_rotation_actions(delta, 0, ""))
    if include_random_rotation:
        actions.append(GateAction("U3rand", RANDOM_ROTATION, 0))
    return ActionSet(actions, delta, n_qubits=1)


def get_two_qubit_actions(delta: float = DELTA_DIMER,
                          include_random_rotation: bool = False,
                          cnot_12: bool = True, cnot_21: bool = True) -> ActionSet:
    """IDLE, the 8 rotations on each qubit and both CNOT directions (19 actions)"""
    actions = [GateAction("I", IDLE)]
    for qubit in (0, 1):
        actions.extend(_rotation_actions(delta, qubit, f"@q{qubit + 1}"))
        if include_random_rotation:
            actions.append(GateAction(f"U3rand@q{qubit + 1}", RANDOM_ROTATION, qubit))
    if cnot_12:
        actions.append(GateAction("CNOT12", ENTANGLER, control=0, target=1))
    if cnot_21:
        actions.append(GateAction("CNOT21", ENTANGLER, control=1, target=0))
    return ActionSet(actions, delta, n_qubits=2)


def get_action_set(n_qubits: int, delta: Optional[float] = None,
                   include_random_rotation: bool = False,
                   cnot_12: bool = True, cnot_21: bool = True) -> ActionSet:
    """Get the default action set for a 1- or 2-qubit problem"""
    if n_qubits == 1:
        return get_single_qubit_actions(
            DELTA_SINGLE_SPIN if delta is None else delta, include_random_rotation
        )
    if n_qubits == 2:
        return get_two_qubit_actions(
            DELTA_DIMER if delta is None else delta, include_random_rotation, cnot_12, cnot_21
        )
    raise ValueError(f"Action sets exist for 1 or 2 qubits, got {n_qubits}")
