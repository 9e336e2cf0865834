"""Shared fixture builders for the test suite.

The separable corpus gives each class its own alphabet, so word unigrams
and character n-grams are fully disjoint across classes and a linear
model can reach perfect accuracy.
"""

from __future__ import annotations

import random
from pathlib import Path

from polyvote.corpus import DatasetSplit, Example, Label

# Disjoint alphabets per class: even char n-grams never collide.
CLASS_ALPHABETS = ("abcd", "efgh", "ijkl")


def class_vocabulary(label: int, size: int = 40, seed: int = 7) -> list[str]:
    rng = random.Random(seed * 31 + label)
    alphabet = CLASS_ALPHABETS[label]
    words = set()
    while len(words) < size:
        length = rng.randint(4, 7)
        words.add("".join(rng.choice(alphabet) for _ in range(length)))
    return sorted(words)


def separable_examples(
    n: int,
    seed: int,
    id_prefix: str = "ex",
    class_fractions: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3),
) -> list[Example]:
    """n examples whose texts use only their own class's vocabulary."""
    rng = random.Random(seed)
    vocabs = [class_vocabulary(c) for c in range(3)]
    counts = [int(n * f) for f in class_fractions]
    counts[0] += n - sum(counts)
    labels = [c for c in range(3) for _ in range(counts[c])]
    rng.shuffle(labels)
    examples = []
    for i, label in enumerate(labels):
        words = rng.choices(vocabs[label], k=rng.randint(5, 9))
        examples.append(
            Example(id=f"{id_prefix}-{i:05d}", text=" ".join(words), label=Label(label))
        )
    return examples


def write_tsv(path: Path, examples: list[Example], labeled: bool = True) -> Path:
    lines = ["id\ttext\tlabel"]
    for ex in examples:
        label = str(int(ex.label)) if labeled and ex.label is not None else ""
        lines.append(f"{ex.id}\t{ex.text}\t{label}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def make_corpus_files(
    tmp_path: Path,
    n_train: int = 300,
    n_dev: int = 90,
    seed: int = 11,
) -> tuple[Path, Path]:
    train = write_tsv(tmp_path / "train.tsv", separable_examples(n_train, seed, "tr"))
    dev = write_tsv(tmp_path / "dev.tsv", separable_examples(n_dev, seed + 1, "dv"))
    return train, dev


BASE_CONFIG = """\
seed = {seed}

[data]
format = "tsv"
train = "train.tsv"
dev = "dev.tsv"

[featurizer]
dims_log2 = 12
word_ngrams = [1, 1]
char_ngrams = [2, 4]
hash_seed = 0
tf_scaling = "log1p-count"
"""


def reference_model_toml(model_id: str, lr: float = 0.1, epochs: int = 10, seed: int = 1) -> str:
    return (
        f'[[models.reference]]\nid = "{model_id}"\nlearning_rate = {lr}\n'
        f"batch_size = 16\nepochs = {epochs}\nseed = {seed}\n"
    )


def external_model_toml(model_id: str, predictions: dict[str, str]) -> str:
    lines = [f'[[models.external]]\nid = "{model_id}"']
    lines.append("[models.external.predictions]")
    for split, path in predictions.items():
        lines.append(f'{split} = "{path}"')
    return "\n".join(lines) + "\n"


def write_config(tmp_path: Path, body: str, seed: int = 42, name: str = "config.toml") -> Path:
    path = tmp_path / name
    path.write_text(BASE_CONFIG.format(seed=seed) + body, encoding="utf-8")
    return path
