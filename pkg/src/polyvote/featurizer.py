"""Deterministic sparse featurization of normalized text.

Word and character n-grams are hashed into a power-of-two index space with
a seeded 64-bit keyed blake2b (RFC 7693) digest, so vectors are identical
across processes, platforms, and architectures.  The top hash bit supplies
a +/-1 sign per n-gram (signed hashing), which makes collision noise
zero-mean instead of additive.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

# Recorded in the run manifest; part of the reproducibility contract.
HASH_FUNCTION = "blake2b-64(keyed)"

TF_SCALINGS = ("binary", "log1p-count")

# Namespace prefixes keep word and char n-gram feature spaces disjoint.
_WORD_NS = b"w\x1f"
_CHAR_NS = b"c\x1f"


@dataclass(frozen=True)
class FeaturizerConfig:
    """Hashed n-gram extraction settings.

    Ranges are inclusive (lo, hi) n-gram orders; either family may be
    disabled with ``None`` but not both.
    """

    dims_log2: int = 18
    word_ngrams: tuple[int, int] | None = (1, 1)
    char_ngrams: tuple[int, int] | None = (2, 4)
    hash_seed: int = 0
    tf_scaling: str = "log1p-count"

    def __post_init__(self) -> None:
        if not 8 <= self.dims_log2 <= 26:
            raise ValueError(f"dims_log2 must be in [8, 26], got {self.dims_log2}")
        if self.word_ngrams is None and self.char_ngrams is None:
            raise ValueError("at least one of word_ngrams/char_ngrams must be enabled")
        for name, rng in (("word_ngrams", self.word_ngrams), ("char_ngrams", self.char_ngrams)):
            if rng is None:
                continue
            lo, hi = rng
            if not (1 <= lo <= hi):
                raise ValueError(f"{name} range must satisfy 1 <= lo <= hi, got {rng}")
        if self.tf_scaling not in TF_SCALINGS:
            raise ValueError(f"tf_scaling must be one of {TF_SCALINGS}, got {self.tf_scaling!r}")

    @property
    def dims(self) -> int:
        return 1 << self.dims_log2

    def to_dict(self) -> dict:
        return {
            "dims_log2": self.dims_log2,
            "word_ngrams": list(self.word_ngrams) if self.word_ngrams else None,
            "char_ngrams": list(self.char_ngrams) if self.char_ngrams else None,
            "hash_seed": self.hash_seed,
            "tf_scaling": self.tf_scaling,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeaturizerConfig":
        def _pair(v: object) -> tuple[int, int] | None:
            return None if v is None else (int(v[0]), int(v[1]))  # type: ignore[index]

        return cls(
            dims_log2=int(d.get("dims_log2", 18)),
            word_ngrams=_pair(d.get("word_ngrams", [1, 1])),
            char_ngrams=_pair(d.get("char_ngrams", [2, 4])),
            hash_seed=int(d.get("hash_seed", 0)),
            tf_scaling=str(d.get("tf_scaling", "log1p-count")),
        )

    def content_hash(self) -> str:
        """Stable digest of the config, stored in model artifacts."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class FeatureVector:
    """Sparse vector: strictly increasing indices with finite values."""

    indices: np.ndarray  # int64, sorted ascending, unique
    values: np.ndarray  # float64, finite, nonzero
    dims: int

    def __post_init__(self) -> None:
        if len(self.indices) != len(self.values):
            raise ValueError("indices and values must have equal length")
        if len(self.indices) and (
            np.any(np.diff(self.indices) <= 0)
            or self.indices[0] < 0
            or self.indices[-1] >= self.dims
        ):
            raise ValueError("indices must be strictly increasing within [0, dims)")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("feature values must be finite")

    def __len__(self) -> int:
        return len(self.indices)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FeatureVector):
            return NotImplemented
        return (
            self.dims == other.dims
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.values, other.values)
        )


def hash64(data: bytes, seed: int) -> int:
    """Seeded 64-bit keyed blake2b digest, little-endian."""
    key = (seed & 0xFFFFFFFFFFFFFFFF).to_bytes(8, "little")
    digest = hashlib.blake2b(data, digest_size=8, key=key).digest()
    return int.from_bytes(digest, "little")


def _ngrams(text: str, config: FeaturizerConfig) -> Iterator[bytes]:
    if config.word_ngrams is not None:
        tokens = text.split()
        lo, hi = config.word_ngrams
        for n in range(lo, hi + 1):
            for i in range(len(tokens) - n + 1):
                yield _WORD_NS + " ".join(tokens[i : i + n]).encode("utf-8")
    if config.char_ngrams is not None:
        lo, hi = config.char_ngrams
        for n in range(lo, hi + 1):
            for i in range(len(text) - n + 1):
                yield _CHAR_NS + text[i : i + n].encode("utf-8")


def featurize(text: str, config: FeaturizerConfig) -> FeatureVector:
    """Map a normalized text to a sparse feature vector.

    The caller is responsible for having passed the text through
    ``normalize_text`` first.  Each n-gram is hashed; index = hash mod
    dims, sign = +1 if bit 63 is clear else -1; signed counts are
    accumulated per index and then tf-scaled.  Indices whose signed counts
    cancel to zero are dropped.
    """
    mask = config.dims - 1
    accum: dict[int, float] = {}
    for gram in _ngrams(text, config):
        h = hash64(gram, config.hash_seed)
        idx = h & mask
        sign = -1.0 if h >> 63 else 1.0
        accum[idx] = accum.get(idx, 0.0) + sign

    items = [(idx, count) for idx, count in accum.items() if count != 0.0]
    items.sort()
    if config.tf_scaling == "binary":
        scaled = [(idx, math.copysign(1.0, c)) for idx, c in items]
    else:
        scaled = [(idx, math.copysign(math.log1p(abs(c)), c)) for idx, c in items]
    if scaled:
        idx_arr = np.array([i for i, _ in scaled], dtype=np.int64)
        val_arr = np.array([v for _, v in scaled], dtype=np.float64)
    else:
        idx_arr = np.empty(0, dtype=np.int64)
        val_arr = np.empty(0, dtype=np.float64)
    return FeatureVector(indices=idx_arr, values=val_arr, dims=config.dims)
