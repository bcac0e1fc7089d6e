"""
Tests for run configuration parsing, precedence and serialization.
"""
import pytest

from run_config import (ConfigError, RunConfig, build_run_config, config_from_text,
                        load_config_file, parse_config_text)


def test_defaults_follow_parameter_table():
    config = RunConfig()
    assert (config.circuits, config.gates, config.epochs) == (100, 10, 300)
    assert (config.gamma, config.alpha, config.target_update, config.memory_size) == (0.99, 0.05, 500, 32)
    assert config.shots == 1024


def test_command_keys_override_common_keys():
    text = "gates=10\ntrain.gates=15\neval.gates=5\nseed=3\n"
    assert parse_config_text(text, "train") == {"gates": "15", "seed": "3"}
    assert parse_config_text(text, "eval") == {"gates": "5", "seed": "3"}
    assert parse_config_text(text, "vqe") == {"gates": "10", "seed": "3"}


def test_command_line_wins_over_file():
    config = build_run_config("train", {"gates": "15", "seed": "3"}, {"gates": 20})
    assert config.gates == 20
    assert config.seed == 3


def test_exact_mode_from_text_and_flag():
    assert build_run_config("train", {"shots": "exact"}).shots is None
    assert build_run_config("train", None, {"shots": "exact"}).shots is None


def test_unknown_section_is_rejected():
    with pytest.raises(ConfigError):
        parse_config_text("plot.color=red\n")


def test_invalid_values_raise_config_error():
    with pytest.raises(ConfigError):
        build_run_config("train", {"gates": "zero"})
    with pytest.raises(ConfigError):
        build_run_config("train", {"qubits": "3"})
    with pytest.raises(ConfigError):
        build_run_config("train", {"unknown_key": "1"})


def test_noise_overrides_are_collected():
    values = parse_config_text("noise=melbourne-like\nnoise.readout_flip_0to1=0.0\n")
    config = build_run_config("baseline", values)
    assert config.noise_model().readout_flip_0to1 == 0.0


def test_unknown_noise_parameter_is_rejected():
    with pytest.raises(ConfigError):
        build_run_config("train", parse_config_text("noise.crosstalk=0.1\n"))


def test_vqe_defaults_to_the_dimer():
    assert build_run_config("vqe").qubits == 2
    assert build_run_config("baseline", {"baseline": "vqe"}).qubits == 2
    assert build_run_config("train").qubits == 1


def test_serialization_round_trip():
    values = parse_config_text(
        "qubits=2\nfield=0.5,0,-1\ndelta=1.5\nshots=exact\n"
        "checkpoint=runs/checkpoint_final.json\ncorrect=true\nsweep_scales=0,1,3\n"
        "noise.phase_damping_1q=0.01\nseed=11\n"
    )
    config = build_run_config("eval", values)
    assert config.noise_overrides == {"phase_damping_1q": 0.01}
    text = config.to_text()
    assert config_from_text(text) == config
    assert config_from_text(text).to_text() == text


def test_serialization_is_sorted_key_value_lines():
    lines = RunConfig().to_text().splitlines()
    keys = [line.split("=", 1)[0] for line in lines]
    assert keys == sorted(keys)
    assert "shots=1024" in lines


def test_load_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# dimer study\nqubits=2\ntrain.epochs=50\n")
    assert load_config_file(path, "train") == {"qubits": "2", "epochs": "50"}
    with pytest.raises(ConfigError):
        load_config_file(tmp_path / "missing.cfg")


def test_environment_supplies_output_default(monkeypatch):
    monkeypatch.setenv("QEIGEN_OUTPUT_DIR", "/data/runs")
    assert RunConfig().out == "/data/runs"


def test_derived_objects():
    config = build_run_config("train", {"qubits": "2", "delta": "0.5", "noise": "off"})
    assert config.hamiltonian().kind == "dimer"
    assert config.action_set().delta == 0.5
    assert config.noise_model().enabled is False
    assert config.train_config().num_gates == 10


def test_validation_options_reach_the_training_config():
    default = build_run_config("train", {}).train_config()
    assert default.restore_best is True
    assert default.resolved_validation_episodes() == default.num_circuits

    config = build_run_config("train", {"validation_episodes": "0"}, {"restore_best": False})
    train_config = config.train_config()
    assert train_config.resolved_validation_episodes() == 0
    assert train_config.restore_best is False
    assert train_config.validation_epsilon == config.eval_epsilon
