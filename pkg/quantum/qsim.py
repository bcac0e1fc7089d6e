#!/usr/bin/env python3
"""
Quantum Simulator - Exact density-matrix evolution for few-qubit registers

Qubit ordering: bitstrings read left to right as qubit 1, qubit 2, ... and
qubit 1 is the most significant bit of the basis index (index 0 in code).
"""

from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from quantum.noise import PAULI_X, PAULI_Y, PAULI_Z, NoiseModel

MAX_QUBITS = 4
ATOL = 1e-12


class Unitary:
    """A 1- or 2-qubit gate matrix with its label and U3 parameters"""

    def __init__(self, matrix: np.ndarray, label: str, params: Tuple[float, ...] = ()):
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.shape not in ((2, 2), (4, 4)):
            raise ValueError(f"Gate '{label}' must be 2x2 or 4x4, got {matrix.shape}")
        self.matrix = matrix
        self.label = label
        self.params = tuple(params)

    @property
    def n_qubits(self) -> int:
        return 1 if self.matrix.shape[0] == 2 else 2

    def is_unitary(self, atol: float = ATOL) -> bool:
        eye = np.eye(self.matrix.shape[0])
        return np.allclose(self.matrix @ self.matrix.conj().T, eye, atol=atol)

    def __repr__(self) -> str:
        return f"Unitary({self.label}, params={self.params})"


def u3(theta: float, phi: float, lam: float) -> Unitary:
    """Generic single-qubit rotation in the standard convention"""
    c = np.cos(theta / 2.0)
    s = np.sin(theta / 2.0)
    matrix = np.array([
        [c, -np.exp(1j * lam) * s],
        [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c],
    ], dtype=complex)
    return Unitary(matrix, "U3", (float(theta), float(phi), float(lam)))


def identity() -> Unitary:
    return Unitary(np.eye(2), "I", (0.0, 0.0, 0.0))


def hadamard() -> Unitary:
    return Unitary(u3(np.pi / 2, 0.0, np.pi).matrix, "H", (np.pi / 2, 0.0, np.pi))


def cnot() -> Unitary:
    """CNOT with control on the first target and NOT on the second"""
    matrix = np.array([
        [1, 0, 0, 0],
        [0, 1, 0, 0],
        [0, 0, 0, 1],
        [0, 0, 1, 0],
    ], dtype=complex)
    return Unitary(matrix, "CNOT")


def embed_operator(op: np.ndarray, targets: Sequence[int], n_qubits: int) -> np.ndarray:
    """Lift a k-qubit operator acting on `targets` to the full register"""
    k = len(targets)
    rest = [q for q in range(n_qubits) if q not in targets]
    full = np.kron(op, np.eye(2 ** (n_qubits - k)))
    if n_qubits == 1:
        return full
    order = list(targets) + rest
    inverse = list(np.argsort(order))
    tensor = full.reshape([2] * (2 * n_qubits))
    tensor = tensor.transpose(inverse + [n_qubits + i for i in inverse])
    return tensor.reshape(2 ** n_qubits, 2 ** n_qubits)


class DensityState:
    """Density matrix of an n-qubit register"""

    def __init__(self, rho: np.ndarray, n_qubits: Optional[int] = None):
        rho = np.asarray(rho, dtype=complex)
        dim = rho.shape[0]
        if n_qubits is None:
            n_qubits = int(round(np.log2(dim)))
        if rho.shape != (2 ** n_qubits, 2 ** n_qubits) or not 1 <= n_qubits <= MAX_QUBITS:
            raise ValueError(f"Invalid density matrix shape {rho.shape} for {n_qubits} qubits")
        self.n_qubits = n_qubits
        self.rho = rho

    @classmethod
    def zero(cls, n_qubits: int) -> "DensityState":
        rho = np.zeros((2 ** n_qubits, 2 ** n_qubits), dtype=complex)
        rho[0, 0] = 1.0
        return cls(rho, n_qubits)

    @classmethod
    def from_statevector(cls, psi: np.ndarray) -> "DensityState":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    def copy(self) -> "DensityState":
        return DensityState(self.rho.copy(), self.n_qubits)

    def trace(self) -> float:
        return float(np.real(np.trace(self.rho)))

    def expectation(self, operator: np.ndarray) -> float:
        return float(np.real(np.trace(self.rho @ operator)))

    def bloch_vector(self, qubit: int = 0) -> np.ndarray:
        """Single-qubit Bloch vector (<X>, <Y>, <Z>) of one register qubit"""
        return np.array([
            self.expectation(embed_operator(p, (qubit,), self.n_qubits))
            for p in (PAULI_X, PAULI_Y, PAULI_Z)
        ])

    def is_valid(self, check_psd: bool = False) -> bool:
        hermitian = np.allclose(self.rho, self.rho.conj().T, atol=ATOL)
        unit_trace = abs(np.trace(self.rho) - 1.0) < 1e-12
        if not check_psd:
            return hermitian and unit_trace
        eigenvalues = np.linalg.eigvalsh((self.rho + self.rho.conj().T) / 2)
        return hermitian and unit_trace and bool(np.all(eigenvalues >= -1e-10))


def apply_kraus(state: DensityState, operators, targets: Sequence[int]) -> DensityState:
    full_ops = [embed_operator(k, targets, state.n_qubits) for k in operators]
    rho = sum(k @ state.rho @ k.conj().T for k in full_ops)
    return DensityState(rho, state.n_qubits)


def _check_targets(targets: Sequence[int], gate: Unitary, n_qubits: int):
    if len(set(targets)) != len(targets):
        raise IndexError(f"Duplicate qubit targets {tuple(targets)}")
    for q in targets:
        if not 0 <= q < n_qubits:
            raise IndexError(f"Qubit index {q} out of range for {n_qubits} qubits")
    if len(targets) != gate.n_qubits:
        raise ValueError(
            f"Gate '{gate.label}' acts on {gate.n_qubits} qubit(s), got targets {tuple(targets)}"
        )


def apply_gate(state: DensityState, gate: Unitary, targets: Sequence[int],
               noise: Optional[NoiseModel] = None) -> DensityState:
    """rho <- U rho U^dagger, then the gate's noise channels. Returns a new state."""
    targets = tuple(int(q) for q in targets)
    _check_targets(targets, gate, state.n_qubits)

    full = embed_operator(gate.matrix, targets, state.n_qubits)
    result = DensityState(full @ state.rho @ full.conj().T, state.n_qubits)

    if noise is None or not noise.enabled:
        return result
    for channel in noise.gate_channels(len(targets)):
        result = apply_kraus(result, channel, targets)
    for qubit in targets:
        for channel in noise.damping_channels():
            result = apply_kraus(result, channel, (qubit,))
    return result


class MeasurementOutcome:
    """Shot counts over computational-basis bitstrings"""

    def __init__(self, counts: Dict[str, int], shots: int, n_qubits: int):
        if sum(counts.values()) != shots:
            raise ValueError(f"Counts sum to {sum(counts.values())}, expected {shots}")
        for key in counts:
            if len(key) != n_qubits or set(key) - {"0", "1"}:
                raise ValueError(f"Invalid outcome key '{key}' for {n_qubits} qubits")
        self.counts = counts
        self.shots = shots
        self.n_qubits = n_qubits

    def frequencies(self) -> np.ndarray:
        freqs = np.zeros(2 ** self.n_qubits)
        for key, count in self.counts.items():
            freqs[int(key, 2)] = count / self.shots
        return freqs


def exact_probabilities(state: DensityState, noise: Optional[NoiseModel] = None) -> np.ndarray:
    """Diagonal of rho with the readout confusion matrix applied"""
    probs = np.clip(np.real(np.diag(state.rho)), 0.0, None)
    probs = probs / probs.sum()
    if noise is not None and noise.enabled:
        probs = noise.readout_matrix(state.n_qubits) @ probs
    return probs


def sample_counts(state: DensityState, shots: int, noise: Optional[NoiseModel],
                  rng: np.random.Generator) -> MeasurementOutcome:
    """Draw shots computational-basis samples, readout flips included.

    Independent per-bit flips compose with the basis distribution, so sampling
    from the confusion-applied probabilities is the same distribution.
    """
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    probs = exact_probabilities(state, noise)
    probs = probs / probs.sum()
    draws = rng.multinomial(shots, probs)
    counts = {
        format(index, f"0{state.n_qubits}b"): int(n)
        for index, n in enumerate(draws) if n > 0
    }
    return MeasurementOutcome(counts, shots, state.n_qubits)
