"""Dataset ingestion, validation, normalization, and summary statistics.

Datasets are collections of short texts, each optionally carrying one of
three integer labels (0 = non-violence, 1 = passive violence, 2 = direct
violence).  Files arrive as TSV, CSV, or JSON lines with a header/field
schema; every loaded text is Unicode-normalized so that downstream
featurization and external predictors see identical strings.
"""

from __future__ import annotations

import csv
import json
import random
import unicodedata
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from typing import Iterable, Sequence

from .errors import EmptyInputError, ParseError, SchemaError

FORMATS = ("tsv", "csv", "jsonl")

# Synthesized ids for rows that do not carry one.  1-based file order.
_ID_TEMPLATE = "row-{:06d}"


class Label(IntEnum):
    """The three-way violence label."""

    NON_VIOLENCE = 0
    PASSIVE_VIOLENCE = 1
    DIRECT_VIOLENCE = 2


LABELS = (Label.NON_VIOLENCE, Label.PASSIVE_VIOLENCE, Label.DIRECT_VIOLENCE)
NUM_CLASSES = 3


def parse_label(value: object) -> Label:
    """Convert an integer (or integer-valued string) to a :class:`Label`.

    Anything outside {0, 1, 2} is rejected.
    """
    if isinstance(value, bool):
        raise SchemaError(f"label must be an integer in 0..2, got boolean {value!r}")
    if isinstance(value, str):
        text = value.strip()
        if not text.lstrip("+-").isdigit():
            raise SchemaError(f"label must be an integer in 0..2, got {value!r}")
        value = int(text)
    if not isinstance(value, int):
        raise SchemaError(f"label must be an integer in 0..2, got {value!r}")
    try:
        return Label(value)
    except ValueError:
        raise SchemaError(f"label must be in 0..2, got {value}") from None


@dataclass(frozen=True)
class Example:
    """One text with an id and an optional gold label."""

    id: str
    text: str
    label: Label | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("example id must be non-empty")


@dataclass(frozen=True)
class DatasetSplit:
    """A named, ordered collection of examples.

    Order is the file order and is stable across reloads.
    """

    name: str
    examples: tuple[Example, ...]

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for ex in self.examples:
            if ex.id in seen:
                raise ValueError(f"duplicate example id {ex.id!r} in split {self.name!r}")
            seen.add(ex.id)

    def __len__(self) -> int:
        return len(self.examples)

    @property
    def labeled(self) -> bool:
        """True iff every example carries a label."""
        return all(ex.label is not None for ex in self.examples)

    @property
    def example_ids(self) -> tuple[str, ...]:
        return tuple(ex.id for ex in self.examples)

    def gold_labels(self) -> list[Label]:
        """Gold labels in split order; raises if any example is unlabeled."""
        labels = []
        for ex in self.examples:
            if ex.label is None:
                raise ValueError(f"example {ex.id!r} in split {self.name!r} has no label")
            labels.append(ex.label)
        return labels


@dataclass(frozen=True)
class SplitStats:
    count: int
    per_class_counts: dict[Label, int]
    per_class_fractions: dict[Label, float]
    max_word_count: int


@dataclass(frozen=True)
class LoadSchema:
    """Column/field mapping for dataset files.

    ``id_column`` is optional: rows without an id get a synthesized
    ``row-%06d`` ordinal so prediction files have a stable join key.
    """

    text_column: str = "text"
    label_column: str = "label"
    id_column: str | None = "id"
    allow_empty_text: bool = False


def normalize_text(raw: str) -> str:
    """Canonicalize a text: collapse whitespace runs, trim, compose to NFC.

    NFC (not NFKC/NFD) keeps Bangla conjuncts intact while canonicalizing
    combining sequences.  Total and idempotent; no non-whitespace codepoint
    is altered except by NFC composition.
    """
    collapsed = " ".join(raw.split())
    return unicodedata.normalize("NFC", collapsed)


def _build_example(
    row_num: int,
    raw_id: str | None,
    raw_text: object,
    raw_label: object,
    schema: LoadSchema,
    path: Path,
) -> Example:
    if not isinstance(raw_text, str):
        raise SchemaError(f"{path}: row {row_num}: text must be a string, got {type(raw_text).__name__}")
    text = normalize_text(raw_text)
    if not text and not schema.allow_empty_text:
        raise SchemaError(f"{path}: row {row_num}: empty text (pass allow_empty_text to permit)")
    label: Label | None = None
    if raw_label is not None and raw_label != "":
        try:
            label = parse_label(raw_label)
        except SchemaError as e:
            raise SchemaError(f"{path}: row {row_num}: {e}") from None
    ex_id = raw_id if raw_id else _ID_TEMPLATE.format(row_num)
    return Example(id=ex_id, text=text, label=label)


def _rows_from_table(
    path: Path, header: Sequence[str], rows: Iterable[Sequence[str]], schema: LoadSchema
) -> list[Example]:
    col_index = {name: i for i, name in enumerate(header)}
    if schema.text_column not in col_index:
        raise SchemaError(f"{path}: header has no {schema.text_column!r} column: {list(header)}")
    text_i = col_index[schema.text_column]
    label_i = col_index.get(schema.label_column)
    id_i = col_index.get(schema.id_column) if schema.id_column else None

    examples = []
    for row_num, row in enumerate(rows, start=1):
        if len(row) != len(header):
            raise ParseError(
                f"{path}: row {row_num}: expected {len(header)} columns, got {len(row)}"
            )
        raw_id = row[id_i] if id_i is not None else None
        raw_label = row[label_i] if label_i is not None else None
        examples.append(_build_example(row_num, raw_id, row[text_i], raw_label, schema, path))
    return examples


def _load_tsv(path: Path, schema: LoadSchema) -> list[Example]:
    # Plain tab-separated, no quoting: normalized texts cannot contain
    # tabs or newlines, and external quote characters stay literal.
    with open(path, "r", encoding="utf-8") as f:
        lines = [line.rstrip("\r\n") for line in f]
    lines = [line for line in lines if line != ""]
    if not lines:
        raise EmptyInputError(f"{path}: file is empty")
    header = lines[0].split("\t")
    return _rows_from_table(path, header, (line.split("\t") for line in lines[1:]), schema)


def _load_csv(path: Path, schema: LoadSchema) -> list[Example]:
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyInputError(f"{path}: file is empty") from None
        return _rows_from_table(path, header, reader, schema)


def _load_jsonl(path: Path, schema: LoadSchema) -> list[Example]:
    examples = []
    with open(path, "r", encoding="utf-8") as f:
        row_num = 0
        for line_num, line in enumerate(f, start=1):
            if not line.strip():
                continue
            row_num += 1
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise ParseError(f"{path}: line {line_num}: invalid JSON: {e.msg}") from None
            if not isinstance(obj, dict):
                raise ParseError(f"{path}: line {line_num}: expected an object per line")
            if "text" not in obj:
                raise SchemaError(f"{path}: line {line_num}: missing required field 'text'")
            raw_id = obj.get("id")
            if raw_id is not None and not isinstance(raw_id, str):
                raise SchemaError(f"{path}: line {line_num}: 'id' must be a string")
            examples.append(
                _build_example(row_num, raw_id, obj["text"], obj.get("label"), schema, path)
            )
    if row_num == 0:
        raise EmptyInputError(f"{path}: file is empty")
    return examples


def load_split(
    path: str | Path,
    format: str = "tsv",
    schema: LoadSchema | None = None,
    name: str = "custom",
) -> DatasetSplit:
    """Load a dataset split from a TSV, CSV, or JSON-lines file.

    TSV/CSV files require a header row; JSON lines carry one object per
    line with fields ``id`` (optional), ``text`` (required), ``label``
    (optional integer 0-2).  Texts are normalized via
    :func:`normalize_text`; labels are validated against the three-class
    enum; missing ids are synthesized from the row ordinal.
    """
    schema = schema or LoadSchema()
    path = Path(path)
    if format not in FORMATS:
        raise ValueError(f"unknown format {format!r}, expected one of {FORMATS}")
    if not path.exists():
        raise FileNotFoundError(f"dataset file not found: {path}")
    if format == "tsv":
        examples = _load_tsv(path, schema)
    elif format == "csv":
        examples = _load_csv(path, schema)
    else:
        examples = _load_jsonl(path, schema)
    if not examples:
        raise EmptyInputError(f"{path}: no data rows")
    try:
        return DatasetSplit(name=name, examples=tuple(examples))
    except ValueError as e:
        raise SchemaError(f"{path}: {e}") from None


def save_split(split: DatasetSplit, path: str | Path, format: str = "tsv") -> None:
    """Write a split back to disk in any of the three load formats.

    Loading the written file reproduces the split exactly (texts are
    already normalized, so normalization is a no-op on reload).
    """
    path = Path(path)
    if format not in FORMATS:
        raise ValueError(f"unknown format {format!r}, expected one of {FORMATS}")
    if format == "jsonl":
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for ex in split.examples:
                obj: dict[str, object] = {"id": ex.id, "text": ex.text}
                if ex.label is not None:
                    obj["label"] = int(ex.label)
                f.write(json.dumps(obj, ensure_ascii=False) + "\n")
        return
    if format == "tsv":
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write("id\ttext\tlabel\n")
            for ex in split.examples:
                for field_name, value in (("id", ex.id), ("text", ex.text)):
                    if "\t" in value or "\n" in value or "\r" in value:
                        raise ValueError(
                            f"example {ex.id!r}: {field_name} contains a tab or newline; "
                            "cannot be written as TSV"
                        )
                label = "" if ex.label is None else str(int(ex.label))
                f.write(f"{ex.id}\t{ex.text}\t{label}\n")
        return
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["id", "text", "label"])
        for ex in split.examples:
            label = "" if ex.label is None else str(int(ex.label))
            writer.writerow([ex.id, ex.text, label])


def compute_stats(split: DatasetSplit) -> SplitStats:
    """Count examples, per-class shares, and the longest whitespace-token text.

    Unlabeled examples are excluded from the per-class maps; a fully
    unlabeled split yields empty maps.
    """
    labels = [ex.label for ex in split.examples if ex.label is not None]
    counts: dict[Label, int] = {}
    for lab in labels:
        counts[lab] = counts.get(lab, 0) + 1
    counts = {lab: counts[lab] for lab in LABELS if lab in counts}
    total_labeled = len(labels)
    fractions = {lab: n / total_labeled for lab, n in counts.items()}
    max_words = max((len(ex.text.split()) for ex in split.examples), default=0)
    return SplitStats(
        count=len(split.examples),
        per_class_counts=counts,
        per_class_fractions=fractions,
        max_word_count=max_words,
    )


def stratified_subsample(split: DatasetSplit, fraction: float, seed: int) -> DatasetSplit:
    """Deterministically subsample a labeled split, preserving class shares.

    Each class keeps ``round(fraction * class_count)`` examples (half-up
    rounding), selected by a seeded RNG; output keeps the input order.
    """
    if not 0 < fraction <= 1:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    if not split.labeled:
        raise ValueError("stratified_subsample requires a fully labeled split")

    by_class: dict[Label, list[int]] = {lab: [] for lab in LABELS}
    for i, ex in enumerate(split.examples):
        assert ex.label is not None
        by_class[ex.label].append(i)

    rng = random.Random(seed)
    keep: set[int] = set()
    for lab in LABELS:
        positions = by_class[lab]
        k = int(fraction * len(positions) + 0.5)
        keep.update(rng.sample(positions, k))

    chosen = tuple(split.examples[i] for i in sorted(keep))
    return DatasetSplit(name=split.name, examples=chosen)
