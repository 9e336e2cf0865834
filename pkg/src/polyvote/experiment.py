"""Declarative experiment configuration and the append-only run manifest.

One TOML file declares the datasets, the featurizer, every model
(trained-in-repo reference models and external prediction files), the
ensemble settings, and the weight-search grid.  All relative paths are
resolved against the config file's directory.  Defaults mirror the
published training recipe (lr 1e-5, batch 16, 10 epochs, AdamW defaults)
and every applied value is echoed into the manifest.
"""

from __future__ import annotations

import hashlib
import json
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .corpus import FORMATS, LoadSchema
from .ensemble import EnsembleConfig
from .errors import ConfigError
from .featurizer import HASH_FUNCTION, FeaturizerConfig
from .trainer import TrainConfig

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SPLIT_NAMES = ("train", "dev", "test")


@dataclass(frozen=True)
class DataConfig:
    format: str
    paths: dict[str, Path]  # split name -> file
    schema: LoadSchema


@dataclass(frozen=True)
class ReferenceModelConfig:
    model_id: str
    train: TrainConfig


@dataclass(frozen=True)
class ExternalModelConfig:
    model_id: str
    predictions: dict[str, Path]  # split name -> predictions file


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int
    out_dir: Path
    data: DataConfig
    featurizer: FeaturizerConfig
    reference_models: list[ReferenceModelConfig]
    external_models: list[ExternalModelConfig]
    ensemble: EnsembleConfig
    grid_step: Fraction
    source_path: Path | None = None
    source_sha256: str | None = None

    @property
    def model_ids(self) -> list[str]:
        return [m.model_id for m in self.reference_models] + [
            m.model_id for m in self.external_models
        ]

    def reference_model(self, model_id: str) -> ReferenceModelConfig:
        for m in self.reference_models:
            if m.model_id == model_id:
                return m
        raise ConfigError(f"unknown reference model {model_id!r}; configured: "
                          f"{[m.model_id for m in self.reference_models]}")

    def split_path(self, split: str) -> Path:
        if split not in self.data.paths:
            raise ConfigError(f"split {split!r} is not configured; have {sorted(self.data.paths)}")
        return self.data.paths[split]

    def to_dict(self) -> dict:
        """Full resolved parameter set, echoed into the manifest."""
        return {
            "seed": self.seed,
            "out_dir": str(self.out_dir),
            "data": {
                "format": self.data.format,
                "paths": {k: str(v) for k, v in sorted(self.data.paths.items())},
                "schema": {
                    "text_column": self.data.schema.text_column,
                    "label_column": self.data.schema.label_column,
                    "id_column": self.data.schema.id_column,
                    "allow_empty_text": self.data.schema.allow_empty_text,
                },
            },
            "featurizer": self.featurizer.to_dict(),
            "reference_models": [
                {"id": m.model_id, "train": vars(m.train)} for m in self.reference_models
            ],
            "external_models": [
                {"id": m.model_id, "predictions": {k: str(v) for k, v in sorted(m.predictions.items())}}
                for m in self.external_models
            ],
            "ensemble": {
                "mode": self.ensemble.mode,
                "priority": list(self.ensemble.priority_order)
                if self.ensemble.priority_order
                else None,
            },
            "grid_step": str(self.grid_step),
        }


def _require(table: dict, key: str, where: str) -> object:
    if key not in table:
        raise ConfigError(f"{where}: missing required key {key!r}")
    return table[key]


def _as_pair(value: object, where: str) -> tuple[int, int] | None:
    if value is None:
        return None
    if not isinstance(value, list) or len(value) != 2:
        raise ConfigError(f"{where}: expected a two-element array, got {value!r}")
    return int(value[0]), int(value[1])


def load_config(
    path: str | Path,
    out_override: str | Path | None = None,
    seed_override: int | None = None,
) -> ExperimentConfig:
    """Parse and fully validate an experiment config file.

    Raises :class:`ConfigError` on any structural problem, including
    dataset paths that do not exist; nothing is written before validation
    succeeds.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    raw_bytes = path.read_bytes()
    try:
        raw = tomllib.loads(raw_bytes.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as e:
        raise ConfigError(f"{path}: invalid TOML: {e}") from None
    base = path.parent

    def resolve(p: object, where: str) -> Path:
        if not isinstance(p, str) or not p:
            raise ConfigError(f"{where}: expected a path string, got {p!r}")
        return (base / p).resolve()

    seed = int(raw.get("seed", 0)) if seed_override is None else int(seed_override)

    data_table = _require(raw, "data", str(path))
    if not isinstance(data_table, dict):
        raise ConfigError(f"{path}: [data] must be a table")
    fmt = str(_require(data_table, "format", f"{path}: [data]"))
    if fmt not in FORMATS:
        raise ConfigError(f"{path}: [data] format must be one of {FORMATS}, got {fmt!r}")
    paths: dict[str, Path] = {}
    for split in SPLIT_NAMES:
        if split in data_table:
            paths[split] = resolve(data_table[split], f"{path}: [data] {split}")
    if not paths:
        raise ConfigError(f"{path}: [data] must configure at least one of {SPLIT_NAMES}")
    for split, p in paths.items():
        if not p.exists():
            raise ConfigError(f"{path}: [data] {split} file does not exist: {p}")
    schema_table = data_table.get("schema", {})
    schema = LoadSchema(
        text_column=str(schema_table.get("text", "text")),
        label_column=str(schema_table.get("label", "label")),
        id_column=schema_table.get("id", "id"),
        allow_empty_text=bool(schema_table.get("allow_empty_text", False)),
    )

    feat_table = raw.get("featurizer", {})
    try:
        featurizer = FeaturizerConfig(
            dims_log2=int(feat_table.get("dims_log2", 18)),
            word_ngrams=_as_pair(feat_table.get("word_ngrams", [1, 1]), f"{path}: [featurizer]"),
            char_ngrams=_as_pair(feat_table.get("char_ngrams", [2, 4]), f"{path}: [featurizer]"),
            hash_seed=int(feat_table.get("hash_seed", 0)),
            tf_scaling=str(feat_table.get("tf_scaling", "log1p-count")),
        )
    except ValueError as e:
        raise ConfigError(f"{path}: [featurizer]: {e}") from None

    models_table = raw.get("models", {})
    reference_models = []
    for entry in models_table.get("reference", []):
        model_id = str(_require(entry, "id", f"{path}: [[models.reference]]"))
        where = f"{path}: [[models.reference]] {model_id}"
        try:
            train = TrainConfig(
                learning_rate=float(entry.get("learning_rate", 1e-5)),
                batch_size=int(entry.get("batch_size", 16)),
                epochs=int(entry.get("epochs", 10)),
                beta1=float(entry.get("beta1", 0.9)),
                beta2=float(entry.get("beta2", 0.999)),
                epsilon=float(entry.get("epsilon", 1e-8)),
                weight_decay=float(entry.get("weight_decay", 0.01)),
                seed=int(entry.get("seed", seed)),
                shuffle=bool(entry.get("shuffle", True)),
            )
        except ValueError as e:
            raise ConfigError(f"{where}: {e}") from None
        reference_models.append(ReferenceModelConfig(model_id=model_id, train=train))

    external_models = []
    for entry in models_table.get("external", []):
        model_id = str(_require(entry, "id", f"{path}: [[models.external]]"))
        where = f"{path}: [[models.external]] {model_id}"
        preds_table = _require(entry, "predictions", where)
        if not isinstance(preds_table, dict) or not preds_table:
            raise ConfigError(f"{where}: predictions must map split names to files")
        predictions = {}
        for split, p in preds_table.items():
            if split not in SPLIT_NAMES:
                raise ConfigError(f"{where}: unknown split {split!r} in predictions")
            predictions[split] = resolve(p, where)
        external_models.append(ExternalModelConfig(model_id=model_id, predictions=predictions))

    model_ids = [m.model_id for m in reference_models] + [m.model_id for m in external_models]
    if not model_ids:
        raise ConfigError(f"{path}: no models configured")
    if len(set(model_ids)) != len(model_ids):
        raise ConfigError(f"{path}: model ids must be unique across reference and external models")

    ens_table = raw.get("ensemble", {})
    priority = ens_table.get("priority")
    if priority is not None:
        priority = tuple(str(p) for p in priority)
        if sorted(priority) != sorted(model_ids):
            raise ConfigError(
                f"{path}: [ensemble] priority must be a permutation of the model ids {model_ids}"
            )
    try:
        ensemble = EnsembleConfig(mode=str(ens_table.get("mode", "hard")), priority_order=priority)
    except ValueError as e:
        raise ConfigError(f"{path}: [ensemble]: {e}") from None

    search_table = raw.get("search", {})
    try:
        grid_step = Fraction(str(search_table.get("grid_step", "1/20")))
    except (ValueError, ZeroDivisionError) as e:
        raise ConfigError(f"{path}: [search] grid_step: {e}") from None
    if grid_step.numerator != 1 or grid_step.denominator < 1:
        raise ConfigError(f"{path}: [search] grid_step must be 1/q for integer q >= 1")

    if out_override is not None:
        out_dir = Path(out_override).resolve()
    else:
        out_dir = (base / str(raw.get("out_dir", "out"))).resolve()

    return ExperimentConfig(
        seed=seed,
        out_dir=out_dir,
        data=DataConfig(format=fmt, paths=paths, schema=schema),
        featurizer=featurizer,
        reference_models=reference_models,
        external_models=external_models,
        ensemble=ensemble,
        grid_step=grid_step,
        source_path=path,
        source_sha256=hashlib.sha256(raw_bytes).hexdigest(),
    )


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


class RunManifest:
    """Append-only JSON-lines record of everything a run touched.

    Each entry carries the command, the resolved parameter set, the config
    hash, the hash-function identity used by the featurizer, and a sha256
    per input and output artifact -- enough to re-run the experiment.
    """

    def __init__(self, out_dir: str | Path):
        self.path = Path(out_dir) / "manifest.jsonl"

    def record(
        self,
        command: str,
        config: ExperimentConfig,
        inputs: dict[str, str | Path],
        outputs: dict[str, str | Path],
    ) -> None:
        from . import __version__

        entry = {
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
            "command": command,
            "toolkit_version": __version__,
            "seed": config.seed,
            "config_sha256": config.source_sha256,
            "config": config.to_dict(),
            "hash_function": HASH_FUNCTION,
            "inputs": {name: sha256_file(p) for name, p in sorted(inputs.items())},
            "outputs": {name: sha256_file(p) for name, p in sorted(outputs.items())},
        }
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "a", encoding="utf-8") as f:
            f.write(json.dumps(entry, sort_keys=True) + "\n")
