"""Fine-tune a checkpoint and export its predictions.

The checkpoint's own tokenizer is used; training is plain mini-batch
AdamW on cross-entropy with a seeded shuffle; exported scores are the
pre-softmax classification-head outputs.  Everything runs on CPU unless a
GPU happens to be available.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

from .data import Row, load_rows
from .errors import ConfigurationError, JobError
from .job import ExporterJob

os.environ.setdefault("HF_HUB_DISABLE_PROGRESS_BARS", "1")
os.environ.setdefault("TRANSFORMERS_NO_ADVISORY_WARNINGS", "1")

NUM_CLASSES = 3


def _load_checkpoint(job: ExporterJob):
    import torch
    from transformers import AutoModelForSequenceClassification, AutoTokenizer

    try:
        tokenizer = AutoTokenizer.from_pretrained(job.checkpoint)
    except (OSError, ValueError) as e:
        raise JobError(f"cannot resolve tokenizer for checkpoint {job.checkpoint!r}: {e}") from None
    torch.manual_seed(job.seed)
    try:
        model = AutoModelForSequenceClassification.from_pretrained(
            job.checkpoint, num_labels=NUM_CLASSES
        )
    except RuntimeError as e:
        raise ConfigurationError(
            f"checkpoint {job.checkpoint!r} has a classification head incompatible "
            f"with {NUM_CLASSES} classes: {e}"
        ) from None
    except (OSError, ValueError) as e:
        raise JobError(f"cannot resolve checkpoint {job.checkpoint!r}: {e}") from None
    if model.config.num_labels != NUM_CLASSES:
        raise ConfigurationError(
            f"checkpoint head has {model.config.num_labels} classes, expected {NUM_CLASSES}"
        )
    return tokenizer, model


def _encode(tokenizer, rows: list[Row], max_length: int):
    return tokenizer(
        [r.text for r in rows],
        truncation=True,
        max_length=max_length,
        padding=True,
        return_tensors="pt",
    )


def _fine_tune(model, tokenizer, rows: list[Row], job: ExporterJob) -> None:
    import torch

    labeled = [r for r in rows if r.label is not None]
    if not labeled:
        raise JobError(f"{job.train_path}: training rows carry no labels")
    labels = torch.tensor([r.label for r in labeled], dtype=torch.long)
    optimizer = torch.optim.AdamW(
        model.parameters(), lr=job.learning_rate, weight_decay=job.weight_decay
    )
    generator = torch.Generator().manual_seed(job.seed)
    model.train()
    for _ in range(job.epochs):
        order = torch.randperm(len(labeled), generator=generator)
        for start in range(0, len(labeled), job.batch_size):
            batch_idx = order[start : start + job.batch_size]
            batch_rows = [labeled[i] for i in batch_idx.tolist()]
            encoded = _encode(tokenizer, batch_rows, job.max_length)
            optimizer.zero_grad()
            logits = model(**encoded).logits
            loss = torch.nn.functional.cross_entropy(logits, labels[batch_idx])
            loss.backward()
            optimizer.step()


def _predict_logits(model, tokenizer, rows: list[Row], job: ExporterJob):
    import torch

    model.eval()
    out = []
    with torch.no_grad():
        for start in range(0, len(rows), job.batch_size):
            batch = rows[start : start + job.batch_size]
            encoded = _encode(tokenizer, batch, job.max_length)
            logits = model(**encoded).logits
            out.extend(logits.tolist())
    return out


def export_predictions(job: ExporterJob) -> Path:
    """Run the job: fine-tune, predict, write the file plus its sidecar.

    Returns the predictions path.  The output is one JSON object per line
    (UTF-8, LF): example_id, model_id, logits (three floats), and label =
    logits argmax with lowest-index tie-break.
    """
    import torch

    torch.manual_seed(job.seed)
    train_rows = load_rows(job.train_path, job.data_format)
    predict_rows = load_rows(job.predict_path, job.data_format)
    tokenizer, model = _load_checkpoint(job)

    _fine_tune(model, tokenizer, train_rows, job)
    all_logits = _predict_logits(model, tokenizer, predict_rows, job)

    output_path = Path(job.output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(output_path, "w", encoding="utf-8", newline="\n") as f:
        for row, logits in zip(predict_rows, all_logits):
            values = [float(v) for v in logits]
            label = max(range(NUM_CLASSES), key=lambda c: (values[c], -c))
            record = {
                "example_id": row.id,
                "model_id": job.model_id,
                "logits": values,
                "label": label,
            }
            f.write(json.dumps(record, ensure_ascii=False) + "\n")

    sidecar = {
        "model_id": job.model_id,
        "checkpoint": job.checkpoint,
        "data_format": job.data_format,
        "train_path": str(job.train_path),
        "predict_path": str(job.predict_path),
        "hyperparameters": job.hyperparameters(),
        "records": len(predict_rows),
    }
    sidecar_path = output_path.with_suffix(output_path.suffix + ".manifest.json")
    sidecar_path.write_text(
        json.dumps(sidecar, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return output_path
