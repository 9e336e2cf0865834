"""Exporter job description.

Hyperparameter defaults mirror the published fine-tuning recipe: learning
rate 1e-5, batch size 16, 10 epochs, AdamW with cross-entropy loss.  The
sequence truncation length (default 256) is a local choice and is echoed
into the sidecar manifest rather than claimed faithful.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import JobError

DATA_FORMATS = ("tsv", "csv", "jsonl")


@dataclass(frozen=True)
class ExporterJob:
    checkpoint: str
    train_path: str
    predict_path: str
    output_path: str
    model_id: str
    data_format: str = "tsv"
    learning_rate: float = 1e-5
    batch_size: int = 16
    epochs: int = 10
    weight_decay: float = 0.01
    max_length: int = 256
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.model_id:
            raise JobError("model_id must be non-empty")
        if not self.checkpoint:
            raise JobError("checkpoint must be non-empty")
        if self.data_format not in DATA_FORMATS:
            raise JobError(f"data_format must be one of {DATA_FORMATS}, got {self.data_format!r}")
        if self.learning_rate <= 0:
            raise JobError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.batch_size < 1:
            raise JobError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 1:
            raise JobError(f"epochs must be >= 1, got {self.epochs}")
        if self.weight_decay < 0:
            raise JobError(f"weight_decay must be >= 0, got {self.weight_decay}")
        if self.max_length < 8:
            raise JobError(f"max_length must be >= 8, got {self.max_length}")

    def hyperparameters(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "batch_size": self.batch_size,
            "epochs": self.epochs,
            "optimizer": "adamw",
            "loss": "cross-entropy",
            "weight_decay": self.weight_decay,
            "max_length": self.max_length,
            "seed": self.seed,
        }


def load_job(path: str | Path) -> ExporterJob:
    """Read a job file (JSON object); relative paths resolve against it."""
    path = Path(path)
    if not path.exists():
        raise JobError(f"job file not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise JobError(f"{path}: invalid JSON: {e.msg}") from None
    if not isinstance(raw, dict):
        raise JobError(f"{path}: job file must contain a JSON object")
    base = path.parent

    def resolve(key: str) -> str:
        value = raw.get(key)
        if not isinstance(value, str) or not value:
            raise JobError(f"{path}: missing or invalid {key!r}")
        return str((base / value).resolve()) if not Path(value).is_absolute() else value

    known = {
        "checkpoint", "train_path", "predict_path", "output_path", "model_id",
        "data_format", "learning_rate", "batch_size", "epochs", "weight_decay",
        "max_length", "seed",
    }
    unknown = set(raw) - known
    if unknown:
        raise JobError(f"{path}: unknown job keys: {sorted(unknown)}")

    checkpoint = raw.get("checkpoint", "")
    # local checkpoint dirs resolve against the job file; hub ids pass through
    if isinstance(checkpoint, str) and checkpoint and (base / checkpoint).exists():
        checkpoint = str((base / checkpoint).resolve())

    return ExporterJob(
        checkpoint=checkpoint,
        train_path=resolve("train_path"),
        predict_path=resolve("predict_path"),
        output_path=resolve("output_path"),
        model_id=str(raw.get("model_id", "")),
        data_format=str(raw.get("data_format", "tsv")),
        learning_rate=float(raw.get("learning_rate", 1e-5)),
        batch_size=int(raw.get("batch_size", 16)),
        epochs=int(raw.get("epochs", 10)),
        weight_decay=float(raw.get("weight_decay", 0.01)),
        max_length=int(raw.get("max_length", 256)),
        seed=int(raw.get("seed", 0)),
    )
