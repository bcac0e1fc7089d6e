#!/usr/bin/env python3
"""
Q Agent - Multi-network Q-learning agent that builds circuits gate by gate

One QNetwork per action, epsilon-greedy exploration, replay memory, delayed
target networks refreshed every C updates, bootstrap targets clipped to [-1, 1].
"""

import json
from pathlib import Path
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Union

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from agents.agent_memory import ReplayMemory, Transition
from agents.circuit_environment import CircuitEnvironment, CircuitEpisode
from agents.q_network import NetworkDocument, QNetwork
from tools.gate_actions import ActionSet

AGENT_DOCUMENT_VERSION = 1
HIDDEN_NEURONS = {1: 32, 2: 64}
EVALUATION_EPSILON = 0.05


class CheckpointError(RuntimeError):
    """Checkpoint file is missing, unreadable or inconsistent"""


class TrainConfig(BaseModel):
    """Training hyperparameters for the circuit-building agent"""

    num_circuits: int = Field(100, gt=0)
    num_gates: int = Field(10, gt=0)
    epochs: int = Field(300, gt=0)
    gamma: float = Field(0.99, gt=0.0, le=1.0)
    alpha: float = Field(0.05, gt=0.0)
    target_update: int = Field(500, gt=0)
    memory_size: int = Field(32, gt=0)
    batch_size: int = Field(1, gt=0)
    n_hidden: Optional[int] = Field(None, gt=0)
    epsilon_initial: float = Field(1.0, ge=0.0, le=1.0)
    epsilon_final: float = Field(0.05, ge=0.0, le=1.0)
    anneal_steps: Optional[int] = Field(None, gt=0)
    validation_episodes: Optional[int] = Field(None, ge=0)
    validation_epsilon: float = Field(EVALUATION_EPSILON, ge=0.0, le=1.0)
    restore_best: bool = True
    seed: int = 0

    def resolved_anneal_steps(self) -> int:
        return self.anneal_steps if self.anneal_steps is not None else 10 * self.num_gates

    def resolved_validation_episodes(self) -> int:
        """Episodes of the end-of-epoch run; defaults to one epoch worth of circuits"""
        if self.validation_episodes is not None:
            return self.validation_episodes
        return self.num_circuits


class EpsilonSchedule:
    """Linear annealing from initial to final over anneal_steps measurements"""

    def __init__(self, initial: float = 1.0, final: float = 0.05, anneal_steps: int = 100):
        self.initial = initial
        self.final = final
        self.anneal_steps = anneal_steps

    def value(self, step: int) -> float:
        if step >= self.anneal_steps:
            return self.final
        fraction = step / self.anneal_steps
        return self.initial + fraction * (self.final - self.initial)


class AgentDocument(BaseModel):
    """Persisted agent: one network per action plus the target copies"""

    version: int = AGENT_DOCUMENT_VERSION
    n_qubits: int
    n_inp: int
    n_hidden: int
    delta: float
    action_labels: List[str]
    update_count: int = 0
    trained_gates: Optional[int] = None
    networks: List[NetworkDocument]
    target_networks: List[NetworkDocument]


class AgentSnapshot(NamedTuple):
    networks: List[QNetwork]
    target_networks: List[QNetwork]


class QAgent:
    """Multi-network Q-learning agent"""

    def __init__(self, action_set: ActionSet, n_inp: int, n_hidden: int,
                 rng: Optional[np.random.Generator] = None, gamma: float = 0.99,
                 alpha: float = 0.05, target_update: int = 500,
                 networks: Optional[List[QNetwork]] = None):
        self.action_set = action_set
        self.n_inp = n_inp
        self.n_hidden = n_hidden
        self.gamma = gamma
        self.alpha = alpha
        self.target_update = target_update
        self.update_count = 0
        if networks is None:
            if rng is None:
                raise ValueError("A random generator is required to initialize networks")
            networks = [QNetwork.init_random(n_inp, n_hidden, rng) for _ in action_set.actions]
        if len(networks) != len(action_set):
            raise ValueError(f"Expected {len(action_set)} networks, got {len(networks)}")
        self.networks = networks
        self.target_networks = [net.copy() for net in networks]

    @property
    def n_actions(self) -> int:
        return len(self.networks)

    def q_values(self, s, target: bool = False) -> np.ndarray:
        values = s.values if hasattr(s, "values") else s
        nets = self.target_networks if target else self.networks
        return np.array([net.forward(values) for net in nets])

    def select_action(self, s, epsilon: float, rng: np.random.Generator) -> int:
        """Random action with probability epsilon, else argmax Q (lowest index on ties)"""
        if rng.random() < epsilon:
            return int(rng.integers(self.n_actions))
        return int(np.argmax(self.q_values(s)))

    def bootstrap_target(self, transition: Transition) -> float:
        if transition.terminal:
            y = transition.r
        else:
            y = transition.r + self.gamma * float(np.max(self.q_values(transition.s_next, target=True)))
        return float(np.clip(y, -1.0, 1.0))

    def learn_step(self, memory: ReplayMemory, rng: np.random.Generator,
                   batch_size: int = 1) -> float:
        """One update on sampled transitions; only the sampled actions' networks change"""
        if len(memory) == 0:
            raise ValueError("Cannot learn from an empty replay memory")
        losses = []
        for transition in memory.sample_batch(batch_size, rng):
            y = self.bootstrap_target(transition)
            assert -1.0 <= y <= 1.0
            network = self.networks[transition.a]
            gradients = network.backward(transition.s.values, y)
            network.apply_update(gradients, self.alpha)
            losses.append(gradients.loss)

        self.update_count += 1
        if self.update_count % self.target_update == 0:
            self.sync_target_networks()
        return float(np.mean(losses))

    def sync_target_networks(self):
        self.target_networks = [net.copy() for net in self.networks]

    def snapshot(self) -> AgentSnapshot:
        return AgentSnapshot([net.copy() for net in self.networks],
                             [net.copy() for net in self.target_networks])

    def restore(self, snapshot: AgentSnapshot):
        """Put back the weights of a snapshot; the update counter keeps running"""
        self.networks = [net.copy() for net in snapshot.networks]
        self.target_networks = [net.copy() for net in snapshot.target_networks]

    def to_document(self, trained_gates: Optional[int] = None) -> AgentDocument:
        return AgentDocument(
            n_qubits=self.action_set.n_qubits,
            n_inp=self.n_inp,
            n_hidden=self.n_hidden,
            delta=self.action_set.delta,
            action_labels=self.action_set.labels,
            update_count=self.update_count,
            trained_gates=trained_gates,
            networks=[net.to_document() for net in self.networks],
            target_networks=[net.to_document() for net in self.target_networks],
        )

    def save(self, path: Union[str, Path], trained_gates: Optional[int] = None):
        document = self.to_document(trained_gates)
        Path(path).write_text(json.dumps(document.model_dump(), indent=1), encoding="utf-8")

    @classmethod
    def load(cls, path: Union[str, Path], action_set: ActionSet, **kwargs) -> "QAgent":
        """Load a checkpoint and check it against the configured problem"""
        path = Path(path)
        try:
            document = AgentDocument.model_validate_json(path.read_text(encoding="utf-8"))
            networks = [QNetwork.from_document(d) for d in document.networks]
            targets = [QNetwork.from_document(d) for d in document.target_networks]
        except FileNotFoundError:
            raise CheckpointError(f"Checkpoint not found: {path}")
        except (ValidationError, ValueError, KeyError) as e:
            raise CheckpointError(f"Corrupted checkpoint {path}: {e}")

        if document.version != AGENT_DOCUMENT_VERSION:
            raise CheckpointError(f"Unsupported checkpoint version {document.version} in {path}")
        if document.n_qubits != action_set.n_qubits or document.action_labels != action_set.labels:
            raise ValueError(
                f"Dimension mismatch: checkpoint {path} has {document.n_qubits} qubit(s) and "
                f"actions {document.action_labels}, configured {action_set.n_qubits} qubit(s) "
                f"and actions {action_set.labels}"
            )
        if not np.isclose(document.delta, action_set.delta):
            raise ValueError(
                f"Dimension mismatch: checkpoint {path} uses delta={document.delta}, "
                f"configured delta={action_set.delta}"
            )

        agent = cls(action_set, document.n_inp, document.n_hidden, networks=networks, **kwargs)
        agent.target_networks = targets
        agent.update_count = document.update_count
        return agent


def build_agent(action_set: ActionSet, config: TrainConfig, rng: np.random.Generator) -> QAgent:
    n_qubits = action_set.n_qubits
    n_inp = 3 if n_qubits == 1 else 15
    n_hidden = config.n_hidden or HIDDEN_NEURONS[n_qubits]
    return QAgent(action_set, n_inp, n_hidden, rng, gamma=config.gamma,
                  alpha=config.alpha, target_update=config.target_update)


def play_episode(agent: QAgent, env: CircuitEnvironment, rng: np.random.Generator,
                 epsilon: Callable[[], float], memory: Optional[ReplayMemory] = None,
                 batch_size: int = 1, on_step: Optional[Callable] = None) -> CircuitEpisode:
    """Run one circuit to num_gates; learns after every step when memory is given"""
    episode = env.init_episode(rng)
    while not env.is_terminal(episode):
        s = episode.s
        action = agent.select_action(s, epsilon(), rng)
        s_next, reward, _ = env.step(episode, action, rng)
        if memory is not None:
            memory.push(Transition(s, action, s_next, reward, env.is_terminal(episode)))
            agent.learn_step(memory, rng, batch_size)
        if on_step is not None:
            on_step(episode)
    return episode


def episode_metrics(episode: CircuitEpisode) -> Dict[str, Any]:
    return {
        "E_initial": episode.initial_energy,
        "E_final": episode.energy,
        "E_min": episode.min_energy,
        "total_reward": episode.total_reward,
        "gate_sequence": ";".join(episode.labels),
    }


def train(config: TrainConfig, env: CircuitEnvironment,
          agent: Optional[QAgent] = None,
          on_episode: Optional[Callable[[Dict[str, Any], CircuitEpisode], None]] = None,
          on_epoch: Optional[Callable[[int, QAgent, List[Dict[str, Any]], Dict[str, Any]], None]] = None,
          on_step: Optional[Callable] = None):
    """Train for epochs x num_circuits episodes; returns (agent, per-episode metrics)

    After every epoch the agent plays the same fixed set of validation circuits
    with epsilon = validation_epsilon and no learning. The epoch with the best
    validation reward is the selected one; with restore_best its weights are put
    back into the returned agent. Without validation episodes the epoch's mean
    training reward is used instead.
    """
    rng = np.random.default_rng(config.seed)
    if agent is None:
        agent = build_agent(env.action_set, config, rng)
    memory = ReplayMemory(config.memory_size)
    schedule = EpsilonSchedule(config.epsilon_initial, config.epsilon_final,
                               config.resolved_anneal_steps())
    n_validation = config.resolved_validation_episodes()
    counter = {"steps": 0}
    best = {"epoch": None, "score": -np.inf, "snapshot": None}

    def next_epsilon() -> float:
        value = schedule.value(counter["steps"])
        counter["steps"] += 1
        return value

    metrics = []
    for epoch in range(config.epochs):
        epoch_rows = []
        for circuit in range(config.num_circuits):
            episode = play_episode(agent, env, rng, next_epsilon, memory,
                                   config.batch_size, on_step)
            row = {"epoch": epoch, "episode": circuit,
                   "epsilon": schedule.value(counter["steps"] - 1)}
            row.update(episode_metrics(episode))
            epoch_rows.append(row)
            if on_episode is not None:
                on_episode(row, episode)
        metrics.extend(epoch_rows)

        # same seed every epoch, so every epoch is scored on the same initial states
        if n_validation:
            validation = evaluate(agent, env, n_validation, config.seed,
                                  config.validation_epsilon).aggregates()
        else:
            validation = {"episodes": 0,
                          "average_reward": float(np.mean([r["total_reward"] for r in epoch_rows]))}
        validation["improved"] = validation["average_reward"] > best["score"]
        if validation["improved"]:
            best.update(epoch=epoch, score=validation["average_reward"], snapshot=agent.snapshot())
        if on_epoch is not None:
            on_epoch(epoch, agent, epoch_rows, validation)

    if config.restore_best and best["snapshot"] is not None:
        agent.restore(best["snapshot"])
    return agent, metrics


class EvaluationReport:
    """Per-episode evaluation rows plus the aggregate panels"""

    def __init__(self, rows: List[Dict[str, Any]], episodes: List[CircuitEpisode],
                 entangling_labels: List[str]):
        self.rows = rows
        self.episodes = episodes
        self.entangling_labels = entangling_labels

    def aggregates(self) -> Dict[str, float]:
        if not self.rows:
            return {"episodes": 0}
        finals = [r["E_final"] for r in self.rows]
        minima = [r["E_min"] for r in self.rows]
        with_cnot = [
            any(label in self.entangling_labels for label in r["gate_sequence"].split(";"))
            for r in self.rows
        ]
        return {
            "episodes": len(self.rows),
            "average_reward": float(np.mean([r["total_reward"] for r in self.rows])),
            "average_energy": float(np.mean(finals)),
            "average_min_energy": float(np.mean(minima)),
            "minimal_energy": float(np.min(minima)),
            "average_initial_energy": float(np.mean([r["E_initial"] for r in self.rows])),
            "cnot_fraction": float(np.mean(with_cnot)),
        }


def evaluate(agent: QAgent, env: CircuitEnvironment, episodes: int, seed: int = 0,
             epsilon: float = EVALUATION_EPSILON) -> EvaluationReport:
    """Near-greedy episodes with one independent random stream per episode"""
    streams = np.random.SeedSequence(seed).spawn(episodes)
    rows, played = [], []
    for index, stream in enumerate(streams):
        rng = np.random.default_rng(stream)
        episode = play_episode(agent, env, rng, lambda: epsilon)
        row = {"episode": index}
        row.update(episode_metrics(episode))
        rows.append(row)
        played.append(episode)
    entangling = [env.action_set[i].label for i in env.action_set.entangling_indices()]
    return EvaluationReport(rows, played, entangling)
