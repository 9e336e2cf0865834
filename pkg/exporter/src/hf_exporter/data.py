"""Minimal dataset reader for the shared file contract.

Mirrors the consuming toolkit's documented loading behavior without
importing it: TSV/CSV/JSON-lines with a header/field schema, NFC +
whitespace normalization, labels in {0, 1, 2}, and ``row-%06d`` ids
synthesized for rows that carry none -- so exported predictions join on
the same example ids the toolkit assigns.
"""

from __future__ import annotations

import csv
import json
import unicodedata
from dataclasses import dataclass
from pathlib import Path

from .errors import JobError


@dataclass(frozen=True)
class Row:
    id: str
    text: str
    label: int | None


def normalize_text(raw: str) -> str:
    return unicodedata.normalize("NFC", " ".join(raw.split()))


def _make_row(ordinal: int, raw_id: str | None, text: str, raw_label) -> Row:
    label: int | None = None
    if raw_label is not None and raw_label != "":
        label = int(raw_label)
        if label not in (0, 1, 2):
            raise JobError(f"row {ordinal}: label must be 0, 1, or 2, got {label}")
    return Row(
        id=raw_id if raw_id else f"row-{ordinal:06d}",
        text=normalize_text(text),
        label=label,
    )


def load_rows(path: str | Path, data_format: str) -> list[Row]:
    path = Path(path)
    if not path.exists():
        raise JobError(f"dataset file not found: {path}")
    rows: list[Row] = []
    if data_format == "jsonl":
        with open(path, "r", encoding="utf-8") as f:
            ordinal = 0
            for line in f:
                if not line.strip():
                    continue
                ordinal += 1
                obj = json.loads(line)
                rows.append(_make_row(ordinal, obj.get("id"), obj["text"], obj.get("label")))
    else:
        with open(path, "r", encoding="utf-8", newline="") as f:
            if data_format == "tsv":
                lines = [line.rstrip("\r\n") for line in f if line.strip()]
                table = [line.split("\t") for line in lines]
            else:
                table = [row for row in csv.reader(f) if row]
            if not table:
                raise JobError(f"{path}: file is empty")
            header = {name: i for i, name in enumerate(table[0])}
            if "text" not in header:
                raise JobError(f"{path}: header has no 'text' column")
            for ordinal, row in enumerate(table[1:], start=1):
                raw_id = row[header["id"]] if "id" in header else None
                raw_label = row[header["label"]] if "label" in header else None
                rows.append(_make_row(ordinal, raw_id, row[header["text"]], raw_label))
    if not rows:
        raise JobError(f"{path}: no data rows")
    return rows
