#!/usr/bin/env python3
"""
Workflow Phases - One method per command: train, eval, baseline, vqe, sumrule, sweep
"""

from typing import Any, Dict, List

import numpy as np
import pandas as pd

from agents.circuit_environment import CircuitEnvironment
from agents.q_agent import QAgent, evaluate, train
from agents.vqe_solver import run_vqe, trajectory_rows
from quantum.observables import (TWO_QUBIT_LABELS, CorrelatorVector, local_spin_correction,
                                 spin_dot, sum_rule_residual)
from run_config import ConfigError
from runs.run_recorder import (BASELINE_FILE, BEST_CHECKPOINT, EPOCHS_FILE, EVALUATION_FILE,
                               EVALUATION_SUMMARY_FILE, FINAL_CHECKPOINT, METRICS_FILE,
                               STEPS_FILE, SUMMARY_FILE, SUMRULE_FILE, SWEEP_FILE,
                               SWEEP_SUMMARY_FILE, TRAJECTORY_FILE, epoch_checkpoint_name,
                               read_correlator_csv)
from workflow_episodes import NOT_CORRECTED


class WorkflowPhases:
    """Handles all command implementations"""

    def __init__(self, workflow_manager):
        self.workflow = workflow_manager
        self.inputs: Dict[str, Any] = {}

    @property
    def config(self):
        return self.workflow.config

    @property
    def recorder(self):
        return self.workflow.recorder

    def prepare(self):
        """Check the command's preconditions and load its inputs before anything is written"""
        config = self.config
        command = config.command
        if command == "eval":
            if not config.checkpoint:
                raise ConfigError("eval needs --checkpoint PATH")
            if config.correct and config.qubits != 2:
                raise ConfigError("--correct applies to the two-qubit dimer only")
            self.inputs["agent"] = QAgent.load(config.checkpoint, config.action_set())
        if command == "vqe" or (command == "baseline" and config.baseline == "vqe"):
            if config.qubits != 2:
                raise ConfigError("The VQE baseline runs on the two-qubit dimer (--qubits 2)")
        if command == "sumrule":
            if not config.input:
                raise ConfigError("sumrule needs an input correlator CSV")
            self.inputs["frame"] = read_correlator_csv(config.input)
        else:
            config.noise_model()

    def _environment(self, noise) -> CircuitEnvironment:
        return CircuitEnvironment(self.config.hamiltonian(), self.config.action_set(),
                                  self.config.gates, noise, self.config.shots,
                                  self.config.basis_noise)

    def cmd_train(self):
        """Train the agent; write metrics, per-epoch summary, checkpoints and summary JSON"""
        print("\n🔄 Training")
        print("-" * 30)
        self.workflow.workflow_state["current_phase"] = "train"

        config = self.config
        train_config = config.train_config()
        noise = config.noise_model()
        env = self._environment(noise)
        print(f"   📊 {env.hamiltonian.kind}, {len(env.action_set)} actions, "
              f"{config.gates} gates, noise={noise.name}, "
              f"shots={config.shots or 'exact'}")

        epoch_rows: List[Dict[str, Any]] = []
        step_rows: List[Dict[str, Any]] = []
        best = {"epoch": None, "validation_reward": None}
        counter = {"episodes": 0}

        def on_episode(row, episode):
            counter["episodes"] += 1

        def on_step(episode):
            index = counter["episodes"]
            step_rows.append(self.workflow.episodes.step_row(
                index // train_config.num_circuits, index % train_config.num_circuits, episode))

        def on_epoch(epoch: int, agent: QAgent, rows: List[Dict[str, Any]],
                     validation: Dict[str, Any]):
            summary = {
                "epoch": epoch,
                "average_reward": float(np.mean([r["total_reward"] for r in rows])),
                "average_energy": float(np.mean([r["E_final"] for r in rows])),
                "average_min_energy": float(np.mean([r["E_min"] for r in rows])),
                "epsilon": rows[-1]["epsilon"],
                "validation_reward": validation["average_reward"],
                "validation_energy": validation.get("average_energy"),
            }
            epoch_rows.append(summary)
            print(f"   ✅ Epoch {epoch + 1}/{train_config.epochs}: "
                  f"reward={summary['average_reward']:.4f} "
                  f"energy={summary['average_energy']:.4f} eps={summary['epsilon']:.3f} "
                  f"validation={summary['validation_reward']:.4f}")

            if validation["improved"]:
                best.update(epoch=epoch, validation_reward=validation["average_reward"])
                self.recorder.save_checkpoint(agent, BEST_CHECKPOINT, config.gates)
            if (epoch + 1) % config.checkpoint_every == 0:
                self.recorder.save_checkpoint(agent, epoch_checkpoint_name(epoch + 1), config.gates)

        agent, metrics = train(train_config, env, on_episode=on_episode, on_epoch=on_epoch,
                               on_step=on_step if config.record_steps else None)

        self.recorder.write_csv(METRICS_FILE, metrics)
        self.recorder.write_csv(EPOCHS_FILE, epoch_rows)
        if config.record_steps:
            self.recorder.write_csv(STEPS_FILE, step_rows)
        self.recorder.save_checkpoint(agent, FINAL_CHECKPOINT, config.gates)
        summary = {
            "command": "train",
            "episodes": len(metrics),
            "updates": agent.update_count,
            "best_epoch": best["epoch"],
            "best_validation_reward": best["validation_reward"],
            "restored_best": train_config.restore_best,
            "final_epoch": epoch_rows[-1],
            "ground_energy": env.hamiltonian.ground_energy(),
        }
        self.recorder.write_json(SUMMARY_FILE, summary)
        self.workflow.results["summary"] = summary

        print(f"\n   ✅ Trained on {len(metrics)} circuits ({agent.update_count} updates)")
        print(f"   ✅ Best validation reward {best['validation_reward']:.4f} at epoch {best['epoch'] + 1}")

    def cmd_eval(self):
        """Evaluate a checkpoint; write per-episode rows and aggregates"""
        print("\n🔄 Evaluation")
        print("-" * 30)
        self.workflow.workflow_state["current_phase"] = "eval"

        config = self.config
        agent = self.inputs["agent"]
        print(f"   📄 Loaded {config.checkpoint}")
        env = self._environment(config.noise_model())
        report = evaluate(agent, env, config.episodes, config.seed, config.eval_epsilon)

        rows = [self.workflow.episodes.evaluation_row(row, episode, config.correct)
                for row, episode in zip(report.rows, report.episodes)]
        self.recorder.write_csv(EVALUATION_FILE, rows)

        aggregates = report.aggregates()
        if config.correct:
            corrected = [r["corrected_energy"] for r in rows if r["corrected_energy"] != NOT_CORRECTED]
            aggregates["corrected_episodes"] = len(corrected)
            aggregates["average_corrected_energy"] = float(np.mean(corrected)) if corrected else None
        aggregates["gates"] = config.gates
        aggregates["ground_energy"] = env.hamiltonian.ground_energy()
        self.recorder.write_json(EVALUATION_SUMMARY_FILE, aggregates)
        self.workflow.results["summary"] = aggregates

        print(f"   ✅ Evaluated {aggregates['episodes']} episodes of {config.gates} gates")
        print(f"   ✅ Average energy {aggregates['average_energy']:.4f}, "
              f"minimal {aggregates['minimal_energy']:.4f}")

    def cmd_baseline(self):
        """Known optimal circuit repeated `runs` times, or the VQE baseline"""
        if self.config.baseline == "vqe":
            return self.cmd_vqe()

        print("\n🔄 Exact-Circuit Baseline")
        print("-" * 30)
        self.workflow.workflow_state["current_phase"] = "baseline"

        config = self.config
        hamiltonian = config.hamiltonian()
        noise = config.noise_model()
        streams = np.random.SeedSequence(config.seed).spawn(config.runs)
        rows = [self.workflow.episodes.run_exact_circuit(run, hamiltonian, noise,
                                                         np.random.default_rng(stream))
                for run, stream in enumerate(streams)]
        self.recorder.write_csv(BASELINE_FILE, rows)

        energies = [r["energy"] for r in rows]
        summary = {
            "command": "baseline",
            "baseline": "exact-circuit",
            "runs": len(rows),
            "noise": noise.name,
            "mean_energy": float(np.mean(energies)),
            "std_energy": float(np.std(energies)),
            "ground_energy": hamiltonian.ground_energy(),
        }
        self.recorder.write_json(SUMMARY_FILE, summary)
        self.workflow.results["summary"] = summary

        print(f"   ✅ {len(rows)} runs, mean energy {summary['mean_energy']:.6f} "
              f"(exact {summary['ground_energy']:.6f})")

    def cmd_vqe(self):
        """Gradient-descent VQE on the dimer; writes the trajectory"""
        print("\n🔄 VQE")
        print("-" * 30)
        self.workflow.workflow_state["current_phase"] = "vqe"

        config = self.config
        hamiltonian = config.hamiltonian()
        noise = config.noise_model()
        trajectory = run_vqe(config.vqe_config(), hamiltonian, noise)
        rows = trajectory_rows(trajectory)
        self.recorder.write_csv(TRAJECTORY_FILE, rows)

        energies = [r["energy"] for r in rows]
        summary = {
            "command": "vqe",
            "iterations": config.iterations,
            "noise": noise.name,
            "final_energy": energies[-1],
            "min_energy": float(np.min(energies)),
            "final_theta": trajectory[-1]["theta"],
            "ground_energy": hamiltonian.ground_energy(),
        }
        self.recorder.write_json(SUMMARY_FILE, summary)
        self.workflow.results["summary"] = summary

        print(f"   ✅ {config.iterations} iterations, final energy {summary['final_energy']:.6f}")

    def cmd_sumrule(self):
        """Append <S1.S2>, sum-rule residual and the local moment correction to each row"""
        print("\n🔄 Sum Rule Correction")
        print("-" * 30)
        self.workflow.workflow_state["current_phase"] = "sumrule"

        config = self.config
        frame = self.inputs["frame"]
        print(f"   📄 Processing {len(frame)} rows from {config.input}")

        extra = {"spin_dot": [], "residual": [], "multiplier": [],
                 "corrected_energy": [], "corrected": []}
        for values in frame[TWO_QUBIT_LABELS].to_numpy():
            c = CorrelatorVector(values)
            sd = spin_dot(c)
            extra["spin_dot"].append(sd)
            extra["residual"].append(sum_rule_residual(c))
            if sd < 0:
                result = local_spin_correction(c, exchange=config.exchange)
                extra["multiplier"].append(result.multiplier)
                extra["corrected_energy"].append(result.corrected_energy)
                extra["corrected"].append(True)
            else:
                extra["multiplier"].append(NOT_CORRECTED)
                extra["corrected_energy"].append(NOT_CORRECTED)
                extra["corrected"].append(False)

        # an eval --correct file already carries corrected_energy; recompute it
        output = pd.concat([frame.drop(columns=list(extra), errors="ignore"),
                            pd.DataFrame(extra, index=frame.index)], axis=1)
        self.recorder.write_frame(SUMRULE_FILE, output)
        corrected = int(sum(extra["corrected"]))
        self.workflow.results["summary"] = {"rows": len(frame), "corrected": corrected}

        print(f"   ✅ Corrected {corrected} rows, flagged {len(frame) - corrected}")

    def cmd_sweep(self):
        """Exact circuit under the noise profile scaled by each sweep factor"""
        print("\n🔄 Noise Sweep")
        print("-" * 30)
        self.workflow.workflow_state["current_phase"] = "sweep"

        config = self.config
        hamiltonian = config.hamiltonian()
        base = config.noise_model()
        rows, scales = [], []
        for scale in config.sweep_scales:
            noise = base.scaled(scale)
            streams = np.random.SeedSequence(config.seed).spawn(config.runs)
            energies = []
            for run, stream in enumerate(streams):
                result = self.workflow.episodes.run_exact_circuit(
                    run, hamiltonian, noise, np.random.default_rng(stream))
                rows.append({"scale": scale, "run": run, "energy": result["energy"]})
                energies.append(result["energy"])
            scales.append({"scale": scale, "mean": float(np.mean(energies)),
                           "std": float(np.std(energies))})
            print(f"   ✅ x{scale:g}: mean energy {scales[-1]['mean']:.4f}")

        self.recorder.write_csv(SWEEP_FILE, rows)
        summary = {"command": "sweep", "noise": base.name, "runs": config.runs,
                   "ground_energy": hamiltonian.ground_energy(), "scales": scales}
        self.recorder.write_json(SWEEP_SUMMARY_FILE, summary)
        self.workflow.results["summary"] = summary
