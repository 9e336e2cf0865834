"""Reference classifier: multinomial logistic regression + mini-batch AdamW.

The trainer stands in for large fine-tuned encoders at desk scale.  Its
defaults (learning rate 1e-5, batch size 16, 10 epochs, AdamW with
cross-entropy loss) mirror the published training recipe; tests and
fixtures always pass explicit configs because 1e-5 is far too small for a
linear model.

AdamW uses the decoupled-weight-decay formulation: the decay term is
applied to the pre-step parameters and never flows through the moment/
bias-correction path.  The bias vector is exempt from decay.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import NUM_CLASSES, DatasetSplit, Example, Label
from .featurizer import FeatureVector, FeaturizerConfig, featurize
from .metrics import evaluate
from .predictions import PredictionRecord

_ARTIFACT_MAGIC = b"PVLM\x01"


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-5
    batch_size: int = 16
    epochs: int = 10
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    weight_decay: float = 0.01
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        for name, beta in (("beta1", self.beta1), ("beta2", self.beta2)):
            if not 0 <= beta < 1:
                raise ValueError(f"{name} must be in [0, 1), got {beta}")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if self.weight_decay < 0:
            raise ValueError(f"weight_decay must be >= 0, got {self.weight_decay}")


@dataclass
class ModelParams:
    """Dense weights (K x D) and bias (K) of the softmax classifier."""

    W: np.ndarray
    b: np.ndarray

    def __post_init__(self) -> None:
        if self.W.ndim != 2 or self.W.shape[0] != NUM_CLASSES:
            raise ValueError(f"W must have shape ({NUM_CLASSES}, D), got {self.W.shape}")
        if self.b.shape != (NUM_CLASSES,):
            raise ValueError(f"b must have shape ({NUM_CLASSES},), got {self.b.shape}")
        if not (np.all(np.isfinite(self.W)) and np.all(np.isfinite(self.b))):
            raise ValueError("parameters must be finite")

    @classmethod
    def zeros(cls, dims: int) -> "ModelParams":
        return cls(W=np.zeros((NUM_CLASSES, dims)), b=np.zeros(NUM_CLASSES))


@dataclass
class OptimizerState:
    """AdamW accumulators; t = 0 implies both moments are all-zero."""

    m_W: np.ndarray
    v_W: np.ndarray
    m_b: np.ndarray
    v_b: np.ndarray
    t: int = 0

    @classmethod
    def zeros_like(cls, params: ModelParams) -> "OptimizerState":
        return cls(
            m_W=np.zeros_like(params.W),
            v_W=np.zeros_like(params.W),
            m_b=np.zeros_like(params.b),
            v_b=np.zeros_like(params.b),
            t=0,
        )


@dataclass(frozen=True)
class EpochLog:
    epoch: int
    mean_loss: float
    dev_macro_f1: float | None = None


@dataclass
class TrainingLog:
    epochs: list[EpochLog] = field(default_factory=list)

    def to_jsonl(self) -> str:
        lines = []
        for e in self.epochs:
            obj: dict[str, object] = {"epoch": e.epoch, "mean_loss": e.mean_loss}
            if e.dev_macro_f1 is not None:
                obj["dev_macro_f1"] = e.dev_macro_f1
            lines.append(json.dumps(obj, sort_keys=True))
        return "\n".join(lines) + ("\n" if lines else "")


def softmax(logits: np.ndarray) -> np.ndarray:
    """Probability vector over classes, computed with max-subtraction."""
    z = np.asarray(logits, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise ValueError("softmax requires finite logits")
    shifted = z - z.max()
    exp = np.exp(shifted)
    return exp / exp.sum()


def cross_entropy(logits: np.ndarray, gold: Label | int) -> tuple[float, np.ndarray]:
    """Loss and gradient w.r.t. logits for one example.

    loss = -log softmax(logits)[gold]; grad = softmax(logits) - onehot(gold).
    """
    z = np.asarray(logits, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise ValueError("cross_entropy requires finite logits")
    g = int(gold)
    m = z.max()
    lse = m + np.log(np.exp(z - m).sum())
    loss = float(lse - z[g])
    grad = np.exp(z - lse)
    grad[g] -= 1.0
    return loss, grad


def adamw_step_array(
    theta: np.ndarray,
    grad: np.ndarray,
    m: np.ndarray,
    v: np.ndarray,
    t: int,
    config: TrainConfig,
    apply_weight_decay: bool = True,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One AdamW update on a single parameter array.

    Returns (theta', m', v') for step t+1.  Decay is decoupled: it scales
    the pre-step theta and never enters the bias-corrected moment path.
    """
    if theta.shape != grad.shape or theta.shape != m.shape or theta.shape != v.shape:
        raise ValueError(
            f"shape mismatch: theta {theta.shape}, grad {grad.shape}, m {m.shape}, v {v.shape}"
        )
    t_new = t + 1
    m_new = config.beta1 * m + (1 - config.beta1) * grad
    v_new = config.beta2 * v + (1 - config.beta2) * grad * grad
    m_hat = m_new / (1 - config.beta1**t_new)
    v_hat = v_new / (1 - config.beta2**t_new)
    update = config.learning_rate * m_hat / (np.sqrt(v_hat) + config.epsilon)
    if apply_weight_decay:
        update = update + config.learning_rate * config.weight_decay * theta
    return theta - update, m_new, v_new


def adamw_step(
    params: ModelParams,
    grad_W: np.ndarray,
    grad_b: np.ndarray,
    state: OptimizerState,
    config: TrainConfig,
) -> tuple[ModelParams, OptimizerState]:
    """One AdamW step over the full model; the bias is exempt from decay."""
    if grad_W.shape != params.W.shape or grad_b.shape != params.b.shape:
        raise ValueError(
            f"gradient shapes {grad_W.shape}/{grad_b.shape} do not match "
            f"parameters {params.W.shape}/{params.b.shape}"
        )
    W, m_W, v_W = adamw_step_array(
        params.W, grad_W, state.m_W, state.v_W, state.t, config, apply_weight_decay=True
    )
    b, m_b, v_b = adamw_step_array(
        params.b, grad_b, state.m_b, state.v_b, state.t, config, apply_weight_decay=False
    )
    return ModelParams(W=W, b=b), OptimizerState(m_W=m_W, v_W=v_W, m_b=m_b, v_b=v_b, t=state.t + 1)


def _sparse_logits(params: ModelParams, fv: FeatureVector) -> np.ndarray:
    if len(fv) == 0:
        return params.b.copy()
    return params.W[:, fv.indices] @ fv.values + params.b


def train(
    split: DatasetSplit,
    featurizer_config: FeaturizerConfig,
    train_config: TrainConfig,
    dev_split: DatasetSplit | None = None,
) -> tuple[ModelParams, TrainingLog]:
    """Train the softmax classifier with mini-batch AdamW.

    Runs epochs x ceil(N / batch_size) optimizer steps with a seeded
    uniform shuffle per epoch; the last partial batch is trained, not
    dropped.  Per-epoch mean loss (over examples, at pre-update
    parameters) is logged, plus dev macro F1 when a labeled dev split is
    supplied.  Returns the final-epoch parameters.
    """
    if len(split) == 0:
        raise ValueError("cannot train on an empty split")
    gold = split.gold_labels()
    features = [featurize(ex.text, featurizer_config) for ex in split.examples]
    n = len(split)

    params = ModelParams.zeros(featurizer_config.dims)
    state = OptimizerState.zeros_like(params)
    rng = np.random.default_rng(train_config.seed)
    log = TrainingLog()

    dev_features: list[FeatureVector] | None = None
    dev_gold: list[Label] | None = None
    if dev_split is not None and len(dev_split) > 0 and dev_split.labeled:
        dev_features = [featurize(ex.text, featurizer_config) for ex in dev_split.examples]
        dev_gold = dev_split.gold_labels()

    for epoch in range(1, train_config.epochs + 1):
        order = rng.permutation(n) if train_config.shuffle else np.arange(n)
        loss_sum = 0.0
        for start in range(0, n, train_config.batch_size):
            batch = order[start : start + train_config.batch_size]
            grad_W = np.zeros_like(params.W)
            grad_b = np.zeros_like(params.b)
            for i in batch:
                fv = features[i]
                logits = _sparse_logits(params, fv)
                loss, grad_logits = cross_entropy(logits, gold[i])
                loss_sum += loss
                if len(fv):
                    grad_W[:, fv.indices] += np.outer(grad_logits, fv.values)
                grad_b += grad_logits
            grad_W /= len(batch)
            grad_b /= len(batch)
            params, state = adamw_step(params, grad_W, grad_b, state, train_config)

        dev_f1: float | None = None
        if dev_features is not None and dev_gold is not None:
            dev_pred = [
                int(np.argmax(_sparse_logits(params, fv))) for fv in dev_features
            ]
            dev_f1 = evaluate(dev_pred, [int(g) for g in dev_gold]).macro_f1
        log.epochs.append(EpochLog(epoch=epoch, mean_loss=loss_sum / n, dev_macro_f1=dev_f1))

    return params, log


def predict(
    params: ModelParams,
    example: Example,
    featurizer_config: FeaturizerConfig,
    model_id: str = "reference",
) -> PredictionRecord:
    """Score one example: logits = W x + b, label = argmax (lowest index wins ties)."""
    fv = featurize(example.text, featurizer_config)
    logits = _sparse_logits(params, fv)
    label = Label(int(np.argmax(logits)))
    return PredictionRecord(
        example_id=example.id,
        model_id=model_id,
        label=label,
        logits=(float(logits[0]), float(logits[1]), float(logits[2])),
    )


def predict_split(
    params: ModelParams,
    split: DatasetSplit,
    featurizer_config: FeaturizerConfig,
    model_id: str = "reference",
) -> list[PredictionRecord]:
    return [predict(params, ex, featurizer_config, model_id) for ex in split.examples]


def save_model(
    params: ModelParams,
    featurizer_config: FeaturizerConfig,
    path: str | Path,
    model_id: str = "reference",
) -> None:
    """Write the model artifact: JSON header + little-endian float64 blocks.

    The header records shapes, the model id, and the featurizer config
    (plus its content hash) so prediction reuses the exact feature space.
    """
    header = {
        "model_id": model_id,
        "classes": NUM_CLASSES,
        "dims": params.W.shape[1],
        "dtype": "<f8",
        "featurizer": featurizer_config.to_dict(),
        "featurizer_hash": featurizer_config.content_hash(),
    }
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as f:
        f.write(_ARTIFACT_MAGIC)
        f.write(struct.pack("<I", len(header_bytes)))
        f.write(header_bytes)
        f.write(np.ascontiguousarray(params.W, dtype="<f8").tobytes())
        f.write(np.ascontiguousarray(params.b, dtype="<f8").tobytes())


def load_model(path: str | Path) -> tuple[ModelParams, FeaturizerConfig, str]:
    """Read a model artifact; returns (params, featurizer_config, model_id)."""
    with open(path, "rb") as f:
        magic = f.read(len(_ARTIFACT_MAGIC))
        if magic != _ARTIFACT_MAGIC:
            raise ValueError(f"{path}: not a model artifact (bad magic)")
        (header_len,) = struct.unpack("<I", f.read(4))
        header = json.loads(f.read(header_len).decode("utf-8"))
        dims = int(header["dims"])
        W = np.frombuffer(f.read(NUM_CLASSES * dims * 8), dtype="<f8").reshape(
            NUM_CLASSES, dims
        )
        b = np.frombuffer(f.read(NUM_CLASSES * 8), dtype="<f8")
    config = FeaturizerConfig.from_dict(header["featurizer"])
    if header.get("featurizer_hash") != config.content_hash():
        raise ValueError(f"{path}: featurizer hash mismatch in artifact header")
    params = ModelParams(W=W.astype(np.float64).copy(), b=b.astype(np.float64).copy())
    return params, config, str(header["model_id"])
