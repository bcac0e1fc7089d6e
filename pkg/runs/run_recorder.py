#!/usr/bin/env python3
"""
Run Recorder - Writes a command's artifacts into its output directory

Row metrics go to CSV through pandas, structured summaries to JSON,
agent weights to checkpoint JSON documents.
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from quantum.observables import TWO_QUBIT_LABELS

CONFIG_FILE = "config.txt"
METRICS_FILE = "metrics.csv"
EPOCHS_FILE = "epochs.csv"
STEPS_FILE = "steps.csv"
SUMMARY_FILE = "summary.json"
EVALUATION_FILE = "evaluation.csv"
EVALUATION_SUMMARY_FILE = "evaluation_summary.json"
BASELINE_FILE = "baseline.csv"
TRAJECTORY_FILE = "trajectory.csv"
SUMRULE_FILE = "sumrule.csv"
SWEEP_FILE = "sweep.csv"
SWEEP_SUMMARY_FILE = "sweep_summary.json"
FINAL_CHECKPOINT = "checkpoint_final.json"
BEST_CHECKPOINT = "checkpoint_best.json"


class CsvFormatError(ValueError):
    """Correlator CSV that cannot be read; the message names the offending line"""


def epoch_checkpoint_name(epoch: int) -> str:
    return f"checkpoint_epoch_{epoch:04d}.json"


def _to_serializable(obj):
    if isinstance(obj, dict):
        return {key: _to_serializable(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_serializable(item) for item in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


class RunRecorder:
    """Artifact writer bound to one existing output directory"""

    def __init__(self, out_dir: Union[str, Path]):
        self.out_dir = Path(out_dir)
        if not self.out_dir.is_dir():
            raise FileNotFoundError(f"Output directory does not exist: {self.out_dir}")
        self.written: List[Path] = []

    def path(self, name: str) -> Path:
        return self.out_dir / name

    def _track(self, path: Path) -> Path:
        if path not in self.written:
            self.written.append(path)
        return path

    def write_config(self, config) -> Path:
        path = self.path(CONFIG_FILE)
        path.write_text(config.to_text(), encoding="utf-8")
        return self._track(path)

    def write_csv(self, name: str, rows: List[Dict[str, Any]],
                  columns: Optional[Sequence[str]] = None) -> Path:
        path = self.path(name)
        pd.DataFrame(rows, columns=columns).to_csv(path, index=False)
        return self._track(path)

    def write_frame(self, name: str, frame: pd.DataFrame) -> Path:
        path = self.path(name)
        frame.to_csv(path, index=False)
        return self._track(path)

    def write_json(self, name: str, data: Dict[str, Any]) -> Path:
        path = self.path(name)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(_to_serializable(data), f, indent=2, ensure_ascii=False)
        return self._track(path)

    def save_checkpoint(self, agent, name: str, trained_gates: Optional[int] = None) -> Path:
        path = self.path(name)
        agent.save(path, trained_gates)
        return self._track(path)


def read_correlator_csv(path: Union[str, Path]) -> pd.DataFrame:
    """Load a CSV holding the 15 two-qubit correlator columns; extra columns are kept"""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Correlator CSV not found: {path}")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise CsvFormatError(f"{path}: line 1: file is empty")
    except pd.errors.ParserError as e:
        raise CsvFormatError(f"{path}: {e}")

    missing = [label for label in TWO_QUBIT_LABELS if label not in frame.columns]
    if missing:
        raise CsvFormatError(f"{path}: line 1: missing correlator columns {missing}")

    for index, row in frame.iterrows():
        # header is line 1
        line = index + 2
        for label in TWO_QUBIT_LABELS:
            try:
                value = float(row[label])
            except ValueError:
                raise CsvFormatError(f"{path}: line {line}: {label}='{row[label]}' is not a number")
            if not np.isfinite(value) or abs(value) > 1.0 + 1e-9:
                raise CsvFormatError(f"{path}: line {line}: {label}={value} outside [-1, 1]")
    frame[TWO_QUBIT_LABELS] = frame[TWO_QUBIT_LABELS].astype(float)
    return frame
