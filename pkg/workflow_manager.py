#!/usr/bin/env python3
"""
Workflow Manager - Main orchestrator and command-line entry point

Commands: train, eval, baseline, vqe, sumrule, sweep.
Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.
"""

import argparse
import sys
from datetime import datetime
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv

from agents.q_agent import CheckpointError
from run_config import ConfigError, RunConfig, build_run_config, load_config_file
from runs.run_recorder import RunRecorder
from workflow_episodes import WorkflowEpisodes
from workflow_phases import WorkflowPhases

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2


class WorkflowManager:
    """Main orchestrator for one command run"""

    def __init__(self, config: RunConfig):
        self.config = config
        self.recorder: Optional[RunRecorder] = None
        self.workflow_state = {
            "status": "initialized",
            "current_phase": None,
            "start_time": None,
            "end_time": None
        }
        self.results: Dict[str, Any] = {
            "summary": None,
            "files": []
        }
        self.phases = WorkflowPhases(self)
        self.episodes = WorkflowEpisodes(self)

    def run(self) -> Dict[str, Any]:
        """Run the configured command and write its artifacts"""
        print(f"🚀 Starting {self.config.command}")
        print("=" * 50)

        self.workflow_state["start_time"] = datetime.now()
        self.workflow_state["status"] = "running"

        try:
            self.recorder = RunRecorder(self.config.out)
            self.phases.prepare()
            self.recorder.write_config(self.config)
            getattr(self.phases, f"cmd_{self.config.command}")()

            self.workflow_state["status"] = "completed"
            self.workflow_state["end_time"] = datetime.now()
            self.results["files"] = [str(p) for p in self.recorder.written]

            print(f"\n✅ {self.config.command} finished successfully!")
            self._print_summary()
            return self.results

        except Exception as e:
            self.workflow_state["status"] = "failed"
            self.workflow_state["end_time"] = datetime.now()
            print(f"\n❌ {self.config.command} failed: {e}")
            raise

    def _calculate_duration(self) -> str:
        """Calculate workflow duration"""
        if not self.workflow_state["start_time"] or not self.workflow_state["end_time"]:
            return "Unknown"
        return str(self.workflow_state["end_time"] - self.workflow_state["start_time"])

    def _print_summary(self):
        print(f"\n📊 Run Summary")
        print(f"   - Output: {self.config.out}")
        for path in self.results["files"]:
            print(f"   - Wrote {path}")
        print(f"   - Duration: {self._calculate_duration()}")


class CommandLineParser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors with exit code 1"""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common_options() -> argparse.ArgumentParser:
    common = CommandLineParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument('--config', type=str, help='Key-value config file')
    common.add_argument('--seed', type=int, help='Master seed (default: 0)')
    common.add_argument('--out', type=str, help='Existing output directory')
    shots = common.add_mutually_exclusive_group()
    shots.add_argument('--shots', type=int, help='Shots per measurement setting (default: 1024)')
    shots.add_argument('--exact', dest='shots', action='store_const', const='exact',
                       help='Exact expectation values instead of sampling')
    common.add_argument('--noise', type=str, help='off, melbourne-like or a profile file')
    common.add_argument('--basis-noise', dest='basis_noise', action='store_true',
                        help='Apply gate noise to measurement basis rotations')
    common.add_argument('--qubits', type=int, choices=[1, 2], help='1 = single spin, 2 = dimer')
    common.add_argument('--gates', type=int, help='Gates per circuit (default: 10)')
    common.add_argument('--field', type=str, help='Magnetic field Bx,By,Bz (default: 1,1,1)')
    common.add_argument('--exchange', type=float, help='Dimer exchange J (default: 1.0)')
    common.add_argument('--delta', type=float, help='Elementary rotation angle in radians')
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = CommandLineParser(description='Reinforcement-learning eigensolver for small spin systems')
    common = _common_options()
    commands = parser.add_subparsers(dest='command', required=True, parser_class=CommandLineParser)

    train = commands.add_parser('train', parents=[common], argument_default=argparse.SUPPRESS,
                                help='Train the Q-learning agent')
    train.add_argument('--epochs', type=int, help='Training epochs (default: 300)')
    train.add_argument('--circuits', type=int, help='Circuits per epoch (default: 100)')
    train.add_argument('--hidden', type=int, help='Hidden neurons per network')
    train.add_argument('--random-rotation', dest='random_rotation', action='store_true',
                       help='Add random U3 actions to the action set')
    train.add_argument('--checkpoint-every', dest='checkpoint_every', type=int,
                       help='Epochs between checkpoints (default: 50)')
    train.add_argument('--record-steps', dest='record_steps', action='store_true',
                       help='Write one row per agent step to steps.csv')
    train.add_argument('--validation-episodes', dest='validation_episodes', type=int,
                       help='Circuits played after each epoch to pick the best epoch (default: --circuits)')
    train.add_argument('--keep-last', dest='restore_best', action='store_false',
                       help='Keep the last epoch weights instead of the best validated epoch')

    evaluate = commands.add_parser('eval', parents=[common], argument_default=argparse.SUPPRESS,
                                   help='Evaluate a trained checkpoint')
    evaluate.add_argument('--checkpoint', type=str, help='Agent checkpoint JSON')
    evaluate.add_argument('--episodes', type=int, help='Evaluation episodes (default: 100)')
    evaluate.add_argument('--epsilon', dest='eval_epsilon', type=float,
                          help='Exploration during evaluation (default: 0.05)')
    evaluate.add_argument('--random-rotation', dest='random_rotation', action='store_true',
                          help='Checkpoint was trained with random U3 actions')
    evaluate.add_argument('--correct', action='store_true',
                          help='Add the local-moment corrected energy (dimer only)')

    baseline = commands.add_parser('baseline', parents=[common], argument_default=argparse.SUPPRESS,
                                   help='Exact-solution circuit or VQE baseline')
    baseline.add_argument('baseline', choices=['exact-circuit', 'vqe'])
    baseline.add_argument('--runs', type=int, help='Independent repetitions (default: 100)')
    baseline.add_argument('--iterations', type=int, help='VQE iterations (default: 500)')
    baseline.add_argument('--no-alpha-cap', dest='cap_alpha', action='store_false',
                          help='Let VQE step-size calibration exceed 2')

    vqe = commands.add_parser('vqe', parents=[common], argument_default=argparse.SUPPRESS,
                              help='Variational eigensolver on the dimer')
    vqe.add_argument('--iterations', type=int, help='Gradient steps (default: 500)')
    vqe.add_argument('--fd-step', dest='fd_step', type=float,
                     help='Finite-difference step (default: 0.1)')
    vqe.add_argument('--no-alpha-cap', dest='cap_alpha', action='store_false',
                     help='Let step-size calibration exceed 2')

    sumrule = commands.add_parser('sumrule', parents=[common], argument_default=argparse.SUPPRESS,
                                  help='Sum-rule residual and local moment correction of a correlator CSV')
    sumrule.add_argument('input', type=str, help='CSV with the 15 two-qubit correlator columns')

    sweep = commands.add_parser('sweep', parents=[common], argument_default=argparse.SUPPRESS,
                                help='Exact circuit under scaled noise')
    sweep.add_argument('--runs', type=int, help='Repetitions per scale (default: 100)')
    sweep.add_argument('--scales', dest='sweep_scales', type=str,
                       help='Comma-separated noise multipliers (default: 0,0.5,1,1.5,2)')
    return parser


def parse_run_config(argv: Optional[List[str]] = None) -> RunConfig:
    """Defaults < environment < config file (common, then command keys) < flags"""
    args = vars(build_parser().parse_args(argv))
    command = args.pop('command')
    config_path = args.pop('config', None)
    file_values = load_config_file(config_path, command) if config_path else {}
    return build_run_config(command, file_values, args)


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    try:
        config = parse_run_config(argv)
    except ConfigError as e:
        print(f"❌ {e}")
        return EXIT_USAGE

    try:
        WorkflowManager(config).run()
    except (CheckpointError, OSError):
        return EXIT_RUNTIME
    except ValueError:
        # config, validation and dimension mismatches
        return EXIT_USAGE
    except Exception:
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
