#!/usr/bin/env python3
"""
Run Config - Command-scoped settings, key-value config files and their
serialization

Config files are flat `key=value` text. A key prefixed with a command name
(`train.gates=15`) only applies to that command.
"""

import io
import os
from pathlib import Path
from typing import Any, Dict, Literal, Optional, Tuple, Union

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from agents.q_agent import TrainConfig
from agents.vqe_solver import VqeConfig
from quantum.noise import PROBABILITY_FIELDS, NoiseModel, load_noise_profile
from quantum.observables import Hamiltonian
from tools.gate_actions import ActionSet, get_action_set

COMMANDS = ("train", "eval", "baseline", "vqe", "sumrule", "sweep")
EXACT = "exact"


class ConfigError(ValueError):
    """Invalid configuration file or values"""


class RunConfig(BaseModel):
    """Every setting a command may read; serialized verbatim into each output dir"""

    model_config = ConfigDict(extra="forbid")

    command: Literal["train", "eval", "baseline", "vqe", "sumrule", "sweep"] = "train"
    # problem
    qubits: int = Field(1, ge=1, le=2)
    field: Tuple[float, float, float] = (1.0, 1.0, 1.0)
    exchange: float = 1.0
    # action set
    delta: Optional[float] = Field(None, gt=0.0)
    random_rotation: bool = False
    cnot_12: bool = True
    cnot_21: bool = True
    # training
    gates: int = Field(10, gt=0)
    epochs: int = Field(300, gt=0)
    circuits: int = Field(100, gt=0)
    gamma: float = Field(0.99, gt=0.0, le=1.0)
    alpha: float = Field(0.05, gt=0.0)
    target_update: int = Field(500, gt=0)
    memory_size: int = Field(32, gt=0)
    batch_size: int = Field(1, gt=0)
    hidden: Optional[int] = Field(None, gt=0)
    epsilon_initial: float = Field(1.0, ge=0.0, le=1.0)
    epsilon_final: float = Field(0.05, ge=0.0, le=1.0)
    anneal_steps: Optional[int] = Field(None, gt=0)
    validation_episodes: Optional[int] = Field(None, ge=0)
    restore_best: bool = True
    checkpoint_every: int = Field(50, gt=0)
    record_steps: bool = False
    # measurement and noise
    shots: Optional[int] = Field(1024, gt=0)
    noise: str = Field(default_factory=lambda: os.getenv("QEIGEN_NOISE_PROFILE", "melbourne-like"))
    noise_overrides: Dict[str, float] = Field(default_factory=dict)
    basis_noise: bool = False
    # evaluation
    checkpoint: Optional[str] = None
    episodes: int = Field(100, gt=0)
    eval_epsilon: float = Field(0.05, ge=0.0, le=1.0)
    correct: bool = False
    # baselines
    baseline: Literal["exact-circuit", "vqe"] = "exact-circuit"
    runs: int = Field(100, gt=0)
    iterations: int = Field(500, ge=0)
    fd_step: float = Field(0.1, gt=0.0)
    cap_alpha: bool = True
    sweep_scales: Tuple[float, ...] = (0.0, 0.5, 1.0, 1.5, 2.0)
    # sumrule
    input: Optional[str] = None
    # run
    seed: int = 0
    out: str = Field(default_factory=lambda: os.getenv("QEIGEN_OUTPUT_DIR", "."))

    @field_validator("field", "sweep_scales", mode="before")
    @classmethod
    def _parse_float_list(cls, value):
        if isinstance(value, str):
            value = [float(part) for part in value.split(",") if part.strip()]
        return value

    @field_validator("shots", mode="before")
    @classmethod
    def _parse_shots(cls, value):
        if isinstance(value, str) and value.strip().lower() in (EXACT, "none", ""):
            return None
        return value

    @field_validator("noise_overrides")
    @classmethod
    def _check_overrides(cls, value):
        unknown = set(value) - set(PROBABILITY_FIELDS)
        if unknown:
            raise ValueError(f"Unknown noise parameters {sorted(unknown)}")
        return value

    # derived objects

    def hamiltonian(self) -> Hamiltonian:
        if self.qubits == 1:
            return Hamiltonian.single_spin(self.field)
        return Hamiltonian.dimer(self.exchange)

    def action_set(self) -> ActionSet:
        return get_action_set(self.qubits, self.delta, self.random_rotation,
                              self.cnot_12, self.cnot_21)

    def noise_model(self) -> NoiseModel:
        return load_noise_profile(self.noise, self.noise_overrides or None)

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            num_circuits=self.circuits, num_gates=self.gates, epochs=self.epochs,
            gamma=self.gamma, alpha=self.alpha, target_update=self.target_update,
            memory_size=self.memory_size, batch_size=self.batch_size, n_hidden=self.hidden,
            epsilon_initial=self.epsilon_initial, epsilon_final=self.epsilon_final,
            anneal_steps=self.anneal_steps, validation_episodes=self.validation_episodes,
            validation_epsilon=self.eval_epsilon, restore_best=self.restore_best, seed=self.seed,
        )

    def vqe_config(self) -> VqeConfig:
        return VqeConfig(iterations=self.iterations, fd_step=self.fd_step,
                         cap_alpha=self.cap_alpha, shots=self.shots,
                         basis_noise=self.basis_noise, seed=self.seed)

    # key-value serialization

    def to_text(self) -> str:
        lines = []
        for key, value in sorted(self.model_dump().items()):
            if value is None:
                if key == "shots":
                    lines.append(f"shots={EXACT}")
                continue
            if key == "noise_overrides":
                lines.extend(f"noise.{k}={v!r}" for k, v in sorted(value.items()))
                continue
            lines.append(f"{key}={_format_value(value)}")
        return "\n".join(lines) + "\n"


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (tuple, list)):
        return ",".join(_format_value(v) for v in value)
    return str(value)


def parse_config_text(text: str, command: Optional[str] = None) -> Dict[str, str]:
    """Common keys plus keys scoped to `command`, with command keys winning"""
    raw = dotenv_values(stream=io.StringIO(text))
    common, scoped, overrides = {}, {}, {}
    for key, value in raw.items():
        if value is None:
            raise ConfigError(f"Config key '{key}' has no value")
        head, _, tail = key.partition(".")
        if tail and head == "noise":
            overrides[tail] = value
        elif tail and head in COMMANDS:
            if head == command:
                scoped[tail] = value
        elif tail:
            raise ConfigError(f"Unknown config section '{head}' in key '{key}'")
        else:
            common[key] = value
    values = {**common, **scoped}
    if overrides:
        values["noise_overrides"] = overrides
    return values


def load_config_file(path: Union[str, Path], command: Optional[str] = None) -> Dict[str, str]:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"Config file not found: {path}")
    return parse_config_text(path.read_text(encoding="utf-8"), command)


def build_run_config(command: str, file_values: Optional[Dict[str, Any]] = None,
                     cli_values: Optional[Dict[str, Any]] = None) -> RunConfig:
    """Defaults < config file < command line"""
    values: Dict[str, Any] = {}
    values.update(file_values or {})
    values.pop("command", None)
    values.update({k: v for k, v in (cli_values or {}).items() if v is not None})
    values["command"] = command
    if (command == "vqe" or values.get("baseline") == "vqe") and "qubits" not in values:
        values["qubits"] = 2
    try:
        return RunConfig(**values)
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration: {e}")


def config_from_text(text: str) -> RunConfig:
    """Inverse of RunConfig.to_text"""
    values = parse_config_text(text)
    command = values.pop("command", "train")
    return build_run_config(command, values)
