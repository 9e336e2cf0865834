"""Per-model, per-example prediction exchange and the models x examples grid.

The predictions file is the boundary through which external classifiers
enter the system: JSON lines, UTF-8, LF, one object per line with fields
``example_id``, ``model_id``, optional ``logits`` (three finite numbers),
and optional ``label`` (0|1|2) -- at least one of logits/label required.
The ``logits`` field holds unnormalized scores; argmax is the only
consumer, so probabilities work equally well.

Missing cells are a hard error, never imputed: the voting rules are
defined over all models, and silent imputation would corrupt votes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import DatasetSplit, Label, parse_label
from .errors import (
    CompletenessError,
    ConsistencyError,
    DuplicateRecordError,
    EmptyInputError,
    ParseError,
    ReferentialError,
    SchemaError,
)

_MAX_LISTED_OFFENDERS = 10


def derive_label(logits: Sequence[float]) -> Label:
    """Argmax with lowest-index tie-break."""
    best = 0
    for i in (1, 2):
        if logits[i] > logits[best]:
            best = i
    return Label(best)


@dataclass(frozen=True)
class PredictionRecord:
    """One model's output on one example."""

    example_id: str
    model_id: str
    label: Label
    logits: tuple[float, float, float] | None = None

    def __post_init__(self) -> None:
        if not self.example_id:
            raise ValueError("example_id must be non-empty")
        if not self.model_id:
            raise ValueError("model_id must be non-empty")
        if self.logits is not None:
            if len(self.logits) != 3 or not all(math.isfinite(v) for v in self.logits):
                raise ValueError(f"logits must be three finite numbers, got {self.logits}")
            if derive_label(self.logits) != self.label:
                raise ConsistencyError(
                    f"label {int(self.label)} does not match logits argmax "
                    f"{int(derive_label(self.logits))} for example {self.example_id!r}"
                )

    @classmethod
    def from_logits(
        cls, example_id: str, model_id: str, logits: Sequence[float]
    ) -> "PredictionRecord":
        values = (float(logits[0]), float(logits[1]), float(logits[2]))
        return cls(
            example_id=example_id,
            model_id=model_id,
            label=derive_label(values),
            logits=values,
        )

    def to_wire(self) -> dict:
        obj: dict[str, object] = {"example_id": self.example_id, "model_id": self.model_id}
        if self.logits is not None:
            obj["logits"] = list(self.logits)
        obj["label"] = int(self.label)
        return obj


def _record_from_wire(obj: dict, where: str) -> PredictionRecord:
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected an object per line")
    for field in ("example_id", "model_id"):
        if not isinstance(obj.get(field), str) or not obj[field]:
            raise SchemaError(f"{where}: missing or invalid {field!r}")
    raw_logits = obj.get("logits")
    raw_label = obj.get("label")
    if raw_logits is None and raw_label is None:
        raise SchemaError(f"{where}: at least one of logits/label is required")

    logits: tuple[float, float, float] | None = None
    if raw_logits is not None:
        if (
            not isinstance(raw_logits, list)
            or len(raw_logits) != 3
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw_logits)
        ):
            raise SchemaError(f"{where}: logits must be a list of three numbers")
        logits = (float(raw_logits[0]), float(raw_logits[1]), float(raw_logits[2]))
        if not all(math.isfinite(v) for v in logits):
            raise SchemaError(f"{where}: logits must be finite")

    if raw_label is not None:
        try:
            label = parse_label(raw_label)
        except SchemaError as e:
            raise SchemaError(f"{where}: {e}") from None
    else:
        assert logits is not None
        label = derive_label(logits)

    try:
        return PredictionRecord(
            example_id=obj["example_id"], model_id=obj["model_id"], label=label, logits=logits
        )
    except ConsistencyError as e:
        raise ConsistencyError(f"{where}: {e}") from None


def _list_offenders(items: Sequence[str]) -> str:
    shown = ", ".join(items[:_MAX_LISTED_OFFENDERS])
    extra = len(items) - _MAX_LISTED_OFFENDERS
    return shown + (f", and {extra} more" if extra > 0 else "")


def import_predictions(path: str | Path, expected_examples: DatasetSplit) -> set[PredictionRecord]:
    """Read and validate a predictions file against a split.

    Total-or-nothing: any malformed line, unknown example id, duplicate
    (model_id, example_id) cell, or label/logits inconsistency raises and
    nothing is returned.  Labels are derived from logits when absent.
    """
    path = Path(path)
    known_ids = set(expected_examples.example_ids)
    records: set[PredictionRecord] = set()
    seen_cells: set[tuple[str, str]] = set()
    unknown: list[str] = []
    duplicates: list[str] = []

    with open(path, "r", encoding="utf-8") as f:
        count = 0
        for line_num, line in enumerate(f, start=1):
            if not line.strip():
                continue
            count += 1
            where = f"{path}: line {line_num}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise ParseError(f"{where}: invalid JSON: {e.msg}") from None
            record = _record_from_wire(obj, where)
            if record.example_id not in known_ids:
                unknown.append(record.example_id)
                continue
            cell = (record.model_id, record.example_id)
            if cell in seen_cells:
                duplicates.append(f"({record.model_id}, {record.example_id})")
                continue
            seen_cells.add(cell)
            records.add(record)
    if count == 0:
        raise EmptyInputError(f"{path}: no prediction records")
    if duplicates:
        raise DuplicateRecordError(
            f"{path}: duplicate (model_id, example_id) cells: {_list_offenders(duplicates)}"
        )
    if unknown:
        raise ReferentialError(
            f"{path}: {len(unknown)} prediction(s) reference unknown example ids: "
            f"{_list_offenders(sorted(set(unknown)))}"
        )
    return records


def export_predictions(records: Iterable[PredictionRecord], path: str | Path) -> None:
    """Write records to the JSON-lines wire format (UTF-8, LF), in iteration order."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for record in records:
            f.write(json.dumps(record.to_wire(), ensure_ascii=False) + "\n")


@dataclass(frozen=True)
class PredictionMatrix:
    """Complete M x N grid of labels (and optional logits) for ensembling."""

    model_ids: tuple[str, ...]
    example_ids: tuple[str, ...]
    labels: np.ndarray  # (M, N) int64
    logits: np.ndarray | None = None  # (M, N, 3) float64, present only if every cell had logits

    def __post_init__(self) -> None:
        m, n = len(self.model_ids), len(self.example_ids)
        if len(set(self.model_ids)) != m:
            raise ValueError("model_ids must be unique")
        if len(set(self.example_ids)) != n:
            raise ValueError("example_ids must be unique")
        if self.labels.shape != (m, n):
            raise ValueError(f"labels grid must be ({m}, {n}), got {self.labels.shape}")
        if self.logits is not None and self.logits.shape != (m, n, 3):
            raise ValueError(f"logits grid must be ({m}, {n}, 3), got {self.logits.shape}")
        self.labels.flags.writeable = False
        if self.logits is not None:
            self.logits.flags.writeable = False

    @property
    def num_models(self) -> int:
        return len(self.model_ids)

    @property
    def num_examples(self) -> int:
        return len(self.example_ids)

    def row(self, model_id: str) -> np.ndarray:
        return self.labels[self.model_ids.index(model_id)]

    def to_records(self) -> list[PredictionRecord]:
        """Flatten back to records (model-major order)."""
        out = []
        for i, model_id in enumerate(self.model_ids):
            for j, example_id in enumerate(self.example_ids):
                logits = None
                if self.logits is not None:
                    logits = tuple(float(v) for v in self.logits[i, j])
                out.append(
                    PredictionRecord(
                        example_id=example_id,
                        model_id=model_id,
                        label=Label(int(self.labels[i, j])),
                        logits=logits,  # type: ignore[arg-type]
                    )
                )
        return out


def assemble_matrix(
    records: Iterable[PredictionRecord],
    model_ids: Sequence[str],
    split: DatasetSplit,
) -> PredictionMatrix:
    """Arrange records into the complete models x examples grid.

    Ordered by the given model order and the split's example order.  Any
    missing cell raises a completeness error naming the first missing
    (model, example) pair; records for models outside ``model_ids`` are
    ignored.
    """
    model_ids = tuple(model_ids)
    if not model_ids:
        raise ValueError("model_ids must be non-empty")
    if len(set(model_ids)) != len(model_ids):
        raise ValueError("model_ids must be unique")
    wanted = set(model_ids)
    by_cell: dict[tuple[str, str], PredictionRecord] = {}
    for record in records:
        if record.model_id not in wanted:
            continue
        cell = (record.model_id, record.example_id)
        if cell in by_cell:
            raise DuplicateRecordError(f"duplicate cell ({record.model_id}, {record.example_id})")
        by_cell[cell] = record

    example_ids = split.example_ids
    m, n = len(model_ids), len(example_ids)
    labels = np.zeros((m, n), dtype=np.int64)
    logits: np.ndarray | None = np.zeros((m, n, 3), dtype=np.float64)
    for i, model_id in enumerate(model_ids):
        for j, example_id in enumerate(example_ids):
            record = by_cell.get((model_id, example_id))
            if record is None:
                raise CompletenessError(
                    f"missing prediction for model {model_id!r} on example {example_id!r}"
                )
            labels[i, j] = int(record.label)
            if logits is not None:
                if record.logits is None:
                    logits = None
                else:
                    logits[i, j] = record.logits
    return PredictionMatrix(
        model_ids=model_ids, example_ids=example_ids, labels=labels, logits=logits
    )
