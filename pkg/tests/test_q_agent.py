"""
Tests for the multi-network Q-learning agent, training loop and evaluation.
"""
import json

import numpy as np
import pytest

from agents.agent_memory import ReplayMemory, Transition
from agents.circuit_environment import CircuitEnvironment
from agents.q_agent import (CheckpointError, EpsilonSchedule, QAgent, TrainConfig, build_agent,
                            evaluate, train)
from agents.q_network import QNetwork
from quantum.observables import CorrelatorVector, Hamiltonian
from tools.gate_actions import get_action_set


def _flat_agent(action_set, n_inp=3, n_hidden=4):
    """Every network outputs Q = 0"""
    networks = [QNetwork(np.ones((n_inp, n_hidden)), np.zeros(n_hidden)) for _ in action_set.actions]
    return QAgent(action_set, n_inp, n_hidden, networks=networks)


def _state(z=1.0):
    return CorrelatorVector([0.0, 0.0, z])


# =============================================================================
# Epsilon Schedule
# =============================================================================

def test_epsilon_anneals_linearly_then_holds():
    schedule = EpsilonSchedule(1.0, 0.05, anneal_steps=100)
    assert schedule.value(0) == 1.0
    assert schedule.value(50) == pytest.approx(0.525)
    assert schedule.value(100) == pytest.approx(0.05)
    assert schedule.value(10_000) == pytest.approx(0.05)


def test_default_anneal_length_is_ten_circuits():
    assert TrainConfig(num_gates=15).resolved_anneal_steps() == 150


# =============================================================================
# Action Selection and Learning
# =============================================================================

def test_greedy_ties_break_to_lowest_index(single_qubit_actions):
    agent = _flat_agent(single_qubit_actions)
    assert agent.select_action(_state(), 0.0, np.random.default_rng(0)) == 0


def test_greedy_always_picks_the_dominant_network(single_qubit_actions):
    agent = _flat_agent(single_qubit_actions)
    # positive output weights on positive hidden activations give Q > 0 everywhere
    agent.networks[5] = QNetwork(np.ones((3, 4)), np.ones(4))
    rng = np.random.default_rng(15)
    picks = {agent.select_action(CorrelatorVector(rng.uniform(-1, 1, 3)), 0.0, rng)
             for _ in range(200)}
    assert picks == {5}


def test_full_exploration_is_uniform(single_qubit_actions):
    agent = _flat_agent(single_qubit_actions)
    rng = np.random.default_rng(1)
    picks = np.bincount([agent.select_action(_state(), 1.0, rng) for _ in range(9000)],
                        minlength=len(single_qubit_actions))
    np.testing.assert_allclose(picks / 9000, 1 / 9, atol=0.02)


def test_bootstrap_target_is_clipped(single_qubit_actions):
    agent = _flat_agent(single_qubit_actions)
    assert agent.bootstrap_target(Transition(_state(), 1, _state(), 5.0, True)) == 1.0
    assert agent.bootstrap_target(Transition(_state(), 1, _state(), -3.0, False)) == -1.0


def test_terminal_target_ignores_next_state(single_qubit_actions):
    agent = build_agent(single_qubit_actions, TrainConfig(), np.random.default_rng(2))
    transition = Transition(_state(), 1, _state(-1.0), 0.3, True)
    assert agent.bootstrap_target(transition) == pytest.approx(0.3)


def test_nonterminal_target_uses_target_networks(single_qubit_actions):
    agent = build_agent(single_qubit_actions, TrainConfig(gamma=0.9), np.random.default_rng(3))
    transition = Transition(_state(), 1, _state(-1.0), 0.1, False)
    expected = 0.1 + 0.9 * np.max(agent.q_values(_state(-1.0), target=True))
    assert agent.bootstrap_target(transition) == pytest.approx(np.clip(expected, -1, 1))


def test_learn_step_updates_only_sampled_action(single_qubit_actions):
    agent = build_agent(single_qubit_actions, TrainConfig(), np.random.default_rng(4))
    before = [net.copy() for net in agent.networks]
    memory = ReplayMemory()
    memory.push(Transition(_state(), 3, _state(-1.0), 0.5, False))
    agent.learn_step(memory, np.random.default_rng(5))
    for index, (old, new) in enumerate(zip(before, agent.networks)):
        assert old.same_weights(new) == (index != 3)


def test_target_networks_sync_every_c_updates(single_qubit_actions):
    agent = build_agent(single_qubit_actions, TrainConfig(target_update=3), np.random.default_rng(6))
    initial_target = agent.target_networks[2].copy()
    memory = ReplayMemory()
    memory.push(Transition(_state(), 2, _state(-1.0), 0.5, False))
    rng = np.random.default_rng(7)

    agent.learn_step(memory, rng)
    agent.learn_step(memory, rng)
    assert agent.target_networks[2].same_weights(initial_target)
    assert not agent.networks[2].same_weights(initial_target)

    agent.learn_step(memory, rng)
    assert agent.update_count == 3
    assert agent.target_networks[2].same_weights(agent.networks[2])


def test_learning_from_empty_memory_raises(single_qubit_actions):
    agent = _flat_agent(single_qubit_actions)
    with pytest.raises(ValueError):
        agent.learn_step(ReplayMemory(), np.random.default_rng(0))


def test_hidden_layer_defaults(single_qubit_actions, two_qubit_actions):
    rng = np.random.default_rng(8)
    assert build_agent(single_qubit_actions, TrainConfig(), rng).n_hidden == 32
    dimer_agent = build_agent(two_qubit_actions, TrainConfig(), rng)
    assert (dimer_agent.n_inp, dimer_agent.n_hidden) == (15, 64)
    assert dimer_agent.n_actions == 19


# =============================================================================
# Checkpoints
# =============================================================================

def test_checkpoint_round_trip(tmp_path, two_qubit_actions):
    agent = build_agent(two_qubit_actions, TrainConfig(), np.random.default_rng(9))
    agent.update_count = 42
    path = tmp_path / "agent.json"
    agent.save(path, trained_gates=10)

    loaded = QAgent.load(path, two_qubit_actions)
    assert loaded.update_count == 42
    s = CorrelatorVector(np.linspace(-0.5, 0.5, 15))
    np.testing.assert_array_equal(loaded.q_values(s), agent.q_values(s))
    assert json.loads(path.read_text())["trained_gates"] == 10


def test_corrupted_checkpoint_names_the_file(tmp_path, single_qubit_actions):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(CheckpointError, match="broken.json"):
        QAgent.load(path, single_qubit_actions)


def test_missing_checkpoint(tmp_path, single_qubit_actions):
    with pytest.raises(CheckpointError):
        QAgent.load(tmp_path / "absent.json", single_qubit_actions)


def test_checkpoint_dimension_mismatch(tmp_path, single_qubit_actions, two_qubit_actions):
    path = tmp_path / "single.json"
    build_agent(single_qubit_actions, TrainConfig(), np.random.default_rng(10)).save(path)
    with pytest.raises(ValueError, match="Dimension mismatch"):
        QAgent.load(path, two_qubit_actions)


def test_checkpoint_delta_mismatch(tmp_path, two_qubit_actions):
    path = tmp_path / "dimer.json"
    build_agent(two_qubit_actions, TrainConfig(), np.random.default_rng(11)).save(path)
    with pytest.raises(ValueError, match="delta"):
        QAgent.load(path, get_action_set(2, delta=1.5))


# =============================================================================
# Training and Evaluation
# =============================================================================

def _single_spin_env(num_gates=3, shots=None):
    return CircuitEnvironment(Hamiltonian.single_spin(), get_action_set(1), num_gates, shots=shots)


def test_train_produces_one_row_per_circuit():
    config = TrainConfig(num_circuits=5, num_gates=3, epochs=2, seed=7)
    agent, metrics = train(config, _single_spin_env())
    assert len(metrics) == 10
    assert agent.update_count == 30
    assert [r["epoch"] for r in metrics] == [0] * 5 + [1] * 5
    assert metrics[0]["epsilon"] < 1.0
    assert all(len(r["gate_sequence"].split(";")) == 3 for r in metrics)


def test_training_is_deterministic_for_a_seed():
    config = TrainConfig(num_circuits=4, num_gates=3, epochs=2, seed=3)
    _, first = train(config, _single_spin_env(shots=256))
    _, second = train(config, _single_spin_env(shots=256))
    assert first == second


def test_train_callbacks():
    config = TrainConfig(num_circuits=3, num_gates=2, epochs=2, seed=1)
    seen = {"episodes": 0, "epochs": [], "steps": 0}

    def on_step(episode):
        seen["steps"] += 1

    def on_episode(row, episode):
        seen["episodes"] += 1

    def on_epoch(epoch, agent, rows, validation):
        seen["epochs"].append((epoch, len(rows), validation["episodes"]))

    train(config, _single_spin_env(num_gates=2), on_episode=on_episode, on_epoch=on_epoch,
          on_step=on_step)
    assert seen == {"episodes": 6, "epochs": [(0, 3, 3), (1, 3, 3)], "steps": 12}


def _q_at_reference_state(agent):
    return agent.q_values(_state(-0.5)).tolist()


def test_validation_reports_one_run_per_epoch():
    config = TrainConfig(num_circuits=3, num_gates=3, epochs=3, seed=2, validation_episodes=4)
    reports = []
    train(config, _single_spin_env(), on_epoch=lambda e, a, rows, v: reports.append(v))
    assert [v["episodes"] for v in reports] == [4, 4, 4]
    assert reports[0]["improved"]
    best = max(v["average_reward"] for v in reports)
    assert sum(v["improved"] and v["average_reward"] == best for v in reports) == 1


def test_restore_best_returns_the_best_validated_epoch():
    config = TrainConfig(num_circuits=4, num_gates=3, epochs=4, seed=5, validation_episodes=6)
    history = []

    def on_epoch(epoch, agent, rows, validation):
        history.append((validation["average_reward"], _q_at_reference_state(agent)))

    agent, _ = train(config, _single_spin_env(), on_epoch=on_epoch)
    scores = [score for score, _ in history]
    best_epoch = scores.index(max(scores))
    assert _q_at_reference_state(agent) == history[best_epoch][1]
    assert agent.update_count == 4 * 4 * 3


def test_keep_last_returns_the_final_weights():
    config = TrainConfig(num_circuits=4, num_gates=3, epochs=3, seed=5, restore_best=False)
    history = []
    agent, _ = train(config, _single_spin_env(),
                     on_epoch=lambda e, a, rows, v: history.append(_q_at_reference_state(a)))
    assert _q_at_reference_state(agent) == history[-1]


def test_without_validation_epochs_are_scored_by_training_reward():
    config = TrainConfig(num_circuits=3, num_gates=3, epochs=2, seed=4, validation_episodes=0)
    reports = []

    def on_epoch(epoch, agent, rows, validation):
        reports.append((validation, np.mean([r["total_reward"] for r in rows])))

    train(config, _single_spin_env(), on_epoch=on_epoch)
    for validation, mean_reward in reports:
        assert validation["episodes"] == 0
        assert validation["average_reward"] == pytest.approx(mean_reward)


def test_validation_leaves_the_training_stream_untouched():
    base = dict(num_circuits=4, num_gates=3, epochs=2, seed=6)
    _, without = train(TrainConfig(validation_episodes=0, **base), _single_spin_env(shots=256))
    _, with_runs = train(TrainConfig(validation_episodes=5, **base), _single_spin_env(shots=256))
    assert without == with_runs


def test_snapshot_restore_round_trip(single_qubit_actions):
    agent = build_agent(single_qubit_actions, TrainConfig(), np.random.default_rng(16))
    snapshot = agent.snapshot()
    before = _q_at_reference_state(agent)
    memory = ReplayMemory()
    memory.push(Transition(_state(-0.5), 0, _state(), 0.8, True))
    for _ in range(5):
        agent.learn_step(memory, np.random.default_rng(17))
    assert _q_at_reference_state(agent) != before

    agent.restore(snapshot)
    assert _q_at_reference_state(agent) == before
    assert agent.update_count == 5

    kept = snapshot.networks[0].copy()
    agent.learn_step(memory, np.random.default_rng(18))
    assert snapshot.networks[0].same_weights(kept)
    assert not agent.networks[0].same_weights(kept)


def test_evaluate_reports_every_episode(two_qubit_actions):
    env = CircuitEnvironment(Hamiltonian.dimer(), two_qubit_actions, num_gates=5, shots=None)
    agent = build_agent(two_qubit_actions, TrainConfig(), np.random.default_rng(12))
    report = evaluate(agent, env, episodes=20, seed=4)
    assert len(report.rows) == 20
    aggregates = report.aggregates()
    assert aggregates["episodes"] == 20
    assert 0.0 <= aggregates["cnot_fraction"] <= 1.0
    assert aggregates["minimal_energy"] <= aggregates["average_min_energy"]
    assert aggregates["average_initial_energy"] == pytest.approx(-0.25)


def test_evaluation_is_reproducible(two_qubit_actions):
    env = CircuitEnvironment(Hamiltonian.dimer(), two_qubit_actions, num_gates=5, shots=512)
    agent = build_agent(two_qubit_actions, TrainConfig(), np.random.default_rng(13))
    assert evaluate(agent, env, 5, seed=9).rows == evaluate(agent, env, 5, seed=9).rows


def test_evaluation_does_not_change_weights(single_qubit_actions):
    agent = build_agent(single_qubit_actions, TrainConfig(), np.random.default_rng(14))
    before = [net.copy() for net in agent.networks]
    evaluate(agent, _single_spin_env(), episodes=5)
    assert all(old.same_weights(new) for old, new in zip(before, agent.networks))


# =============================================================================
# Long Training Runs
# =============================================================================

@pytest.mark.slow
def test_single_spin_agent_learns_ground_state():
    env = CircuitEnvironment(Hamiltonian.single_spin(), get_action_set(1), num_gates=10, shots=None)
    agent, _ = train(TrainConfig(seed=0), env)
    aggregates = evaluate(agent, env, episodes=100, seed=1, epsilon=0.0).aggregates()
    assert aggregates["average_energy"] <= -0.80
    assert aggregates["average_reward"] > 0.0


@pytest.mark.slow
def test_dimer_agent_beats_classical_limit():
    actions = get_action_set(2, delta=1.0)
    env = CircuitEnvironment(Hamiltonian.dimer(), actions, num_gates=10, shots=None)
    agent, _ = train(TrainConfig(seed=0), env)
    aggregates = evaluate(agent, env, episodes=100, seed=1, epsilon=0.0).aggregates()
    assert aggregates["average_energy"] < -0.25
    assert aggregates["cnot_fraction"] >= 0.5


@pytest.mark.slow
def test_noisy_dimer_agent_lands_between_classical_and_exact(melbourne):
    actions = get_action_set(2, delta=1.0)
    env = CircuitEnvironment(Hamiltonian.dimer(), actions, num_gates=10, noise=melbourne, shots=None)
    agent, _ = train(TrainConfig(seed=0), env)
    aggregates = evaluate(agent, env, episodes=100, seed=1, epsilon=0.0).aggregates()
    assert -0.70 <= aggregates["average_energy"] <= -0.45
