"""Tiny randomly initialized encoder checkpoints for fixture-scale runs.

No pretrained weights and no network: a character-level WordPiece vocab
plus a two-layer BERT sized for CPU tests.  Useful for exercising the
export contract end to end without any learning claim.
"""

from __future__ import annotations

import string
from pathlib import Path

SPECIAL_TOKENS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]


def save_tiny_checkpoint(
    path: str | Path,
    seed: int = 0,
    num_labels: int = 3,
    hidden_size: int = 32,
    num_layers: int = 2,
) -> Path:
    """Write a small random encoder + tokenizer to ``path`` and return it."""
    import torch
    from transformers import BertConfig, BertForSequenceClassification, BertTokenizerFast

    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    letters = list(string.ascii_lowercase) + list(string.digits)
    vocab = SPECIAL_TOKENS + letters + ["##" + c for c in letters]
    vocab_file = path / "vocab.txt"
    vocab_file.write_text("\n".join(vocab) + "\n", encoding="utf-8")
    tokenizer = BertTokenizerFast(vocab_file=str(vocab_file), do_lower_case=True)

    torch.manual_seed(seed)
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=hidden_size,
        num_hidden_layers=num_layers,
        num_attention_heads=2,
        intermediate_size=hidden_size * 2,
        max_position_embeddings=512,
        num_labels=num_labels,
    )
    model = BertForSequenceClassification(config)
    model.save_pretrained(path)
    tokenizer.save_pretrained(path)
    return path
