"""Combining the prediction matrix into final labels.

Hard voting returns the mode of the member labels; weighted voting scores
each label by the total weight of the models voting for it.  Both share
one tie rule: among the tied labels, the vote cast by the highest-priority
model wins (priority defaults to matrix order).  Weighted voting operates
on hard labels, not averaged probabilities, so label-only external
predictors are first-class.

Weight search is an exhaustive sweep of the probability simplex at a
rational grid step; for five models at step 1/20 that is C(24, 4) = 10626
points.  All reductions apply deterministic tie-breaking, so results are
independent of evaluation order.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .corpus import NUM_CLASSES, Label
from .metrics import macro_f1_from_arrays
from .predictions import PredictionMatrix

# Two weighted scores within this window count as tied; the window absorbs
# float noise from weight normalization while staying far below the 1/q
# gaps of any realistic grid.
TIE_EPS = 1e-12

MAX_SUBSET_MODELS = 20

VOTE_MODES = ("hard", "weighted")


@dataclass(frozen=True)
class WeightVector:
    """Non-negative per-model voting weights, at least one positive."""

    weights: dict[str, float]

    def __post_init__(self) -> None:
        if not self.weights:
            raise ValueError("weight vector must not be empty")
        for model_id, w in self.weights.items():
            if not np.isfinite(w) or w < 0:
                raise ValueError(f"weight for {model_id!r} must be finite and >= 0, got {w}")
        if not any(w > 0 for w in self.weights.values()):
            raise ValueError("at least one weight must be positive")

    def normalized(self) -> "WeightVector":
        """Canonical form with weights summing to 1 (for reporting; votes
        are invariant to positive scaling)."""
        total = sum(self.weights.values())
        return WeightVector({m: w / total for m, w in self.weights.items()})

    def aligned(self, model_ids: Sequence[str]) -> np.ndarray:
        if set(self.weights) != set(model_ids):
            raise ValueError(
                f"weights cover {sorted(self.weights)} but matrix has {sorted(model_ids)}"
            )
        return np.array([self.weights[m] for m in model_ids], dtype=np.float64)

    def to_json(self) -> str:
        return json.dumps(self.weights, sort_keys=True, indent=2)

    @classmethod
    def uniform(cls, model_ids: Sequence[str]) -> "WeightVector":
        return cls({m: 1.0 / len(model_ids) for m in model_ids})


@dataclass(frozen=True)
class EnsembleConfig:
    mode: str = "hard"
    priority_order: tuple[str, ...] | None = None  # None = matrix order

    def __post_init__(self) -> None:
        if self.mode not in VOTE_MODES:
            raise ValueError(f"mode must be one of {VOTE_MODES}, got {self.mode!r}")


@dataclass(frozen=True)
class ExampleBreakdown:
    example_id: str
    votes: dict[str, Label]
    scores: dict[Label, float]
    winner: Label
    winning_score: float


@dataclass(frozen=True)
class EnsembleResult:
    labels: list[Label]
    breakdown: list[ExampleBreakdown]


@dataclass(frozen=True)
class WeightSearchResult:
    best_weights: WeightVector
    best_dev_macro_f1: float
    grid_step: Fraction
    evaluations: int

    def to_dict(self) -> dict:
        return {
            "best_weights": self.best_weights.weights,
            "best_dev_macro_f1": self.best_dev_macro_f1,
            "grid_step": str(self.grid_step),
            "evaluations": self.evaluations,
        }


@dataclass(frozen=True)
class SubsetResult:
    model_ids: tuple[str, ...]
    macro_f1: float

    @property
    def size(self) -> int:
        return len(self.model_ids)


def _resolve_tie(votes: Sequence[int], tied: Sequence[bool], priority: Sequence[int]) -> Label:
    for pos in priority:
        if tied[votes[pos]]:
            return Label(votes[pos])
    raise AssertionError("no model voted for any tied label")


def hard_vote(votes: Sequence[int | Label], priority: Sequence[int] | None = None) -> Label:
    """Mode of the votes; ties go to the highest-priority model's vote.

    ``priority`` lists model positions, highest priority first; the
    default is positional order.
    """
    m = len(votes)
    if m < 1:
        raise ValueError("hard_vote requires at least one vote")
    votes_int = [int(v) for v in votes]
    priority = range(m) if priority is None else priority
    counts = [0, 0, 0]
    for v in votes_int:
        counts[v] += 1
    top = max(counts)
    tied = [c == top for c in counts]
    return _resolve_tie(votes_int, tied, priority)


def weighted_vote(
    votes: Sequence[int | Label],
    weights: Sequence[float],
    priority: Sequence[int] | None = None,
) -> Label:
    """Label with the greatest total voter weight.

    Weights are normalized to sum 1 before scoring (votes are invariant to
    positive scaling); scores within ``TIE_EPS`` of the maximum are tied
    and resolved by the hard-vote tie rule restricted to the tied labels.
    """
    m = len(votes)
    if m < 1:
        raise ValueError("weighted_vote requires at least one vote")
    if len(weights) != m:
        raise ValueError(f"{len(weights)} weights for {m} votes")
    total = float(sum(weights))
    if any(w < 0 for w in weights):
        raise ValueError("weights must be non-negative")
    if total <= 0:
        raise ValueError("weights must not be all zero")
    votes_int = [int(v) for v in votes]
    priority = range(m) if priority is None else priority
    scores = [0.0, 0.0, 0.0]
    for v, w in zip(votes_int, weights):
        scores[v] += w / total
    top = max(scores)
    tied = [top - s <= TIE_EPS for s in scores]
    return _resolve_tie(votes_int, tied, priority)


def _priority_positions(matrix: PredictionMatrix, priority_order: Sequence[str] | None) -> list[int]:
    if priority_order is None:
        return list(range(matrix.num_models))
    if sorted(priority_order) != sorted(matrix.model_ids):
        raise ValueError(
            f"priority_order {list(priority_order)} is not a permutation of "
            f"matrix models {list(matrix.model_ids)}"
        )
    index = {m: i for i, m in enumerate(matrix.model_ids)}
    return [index[m] for m in priority_order]


def ensemble_predict(
    matrix: PredictionMatrix,
    config: EnsembleConfig,
    weights: WeightVector | None = None,
) -> EnsembleResult:
    """Vote per example and record each model's ballot and the winning score."""
    if (weights is not None) != (config.mode == "weighted"):
        raise ValueError("weights must be given exactly when mode is 'weighted'")
    priority = _priority_positions(matrix, config.priority_order)
    aligned = weights.aligned(matrix.model_ids) if weights is not None else None

    labels: list[Label] = []
    breakdown: list[ExampleBreakdown] = []
    for j, example_id in enumerate(matrix.example_ids):
        votes = [int(v) for v in matrix.labels[:, j]]
        if aligned is None:
            winner = hard_vote(votes, priority)
            scores = {Label(c): float(votes.count(c)) for c in range(NUM_CLASSES)}
        else:
            winner = weighted_vote(votes, aligned, priority)
            total = float(aligned.sum())
            raw = [0.0, 0.0, 0.0]
            for v, w in zip(votes, aligned):
                raw[v] += w / total
            scores = {Label(c): raw[c] for c in range(NUM_CLASSES)}
        labels.append(winner)
        breakdown.append(
            ExampleBreakdown(
                example_id=example_id,
                votes={m: Label(v) for m, v in zip(matrix.model_ids, votes)},
                scores=scores,
                winner=winner,
                winning_score=scores[winner],
            )
        )
    return EnsembleResult(labels=labels, breakdown=breakdown)


def _vote_rows_to_labels(
    scores: np.ndarray, votes: np.ndarray, priority: Sequence[int], eps: float
) -> np.ndarray:
    """Resolve per-example scores (N, 3) to labels via the priority tie rule.

    ``votes`` is (M, N); the scan assigns each example the vote of the
    first priority model whose ballot lies in that example's tied set.
    """
    n = scores.shape[0]
    top = scores.max(axis=1, keepdims=True)
    tied = scores >= top - eps
    out = np.full(n, -1, dtype=np.int64)
    unresolved = np.ones(n, dtype=bool)
    rows = np.arange(n)
    for pos in priority:
        cand = votes[pos]
        hit = unresolved & tied[rows, cand]
        out[hit] = cand[hit]
        unresolved &= ~hit
        if not unresolved.any():
            break
    assert not unresolved.any()
    return out


def _hard_vote_labels(votes: np.ndarray, priority: Sequence[int]) -> np.ndarray:
    """Vectorized hard vote over an (M, N) ballot grid."""
    onehot = np.stack([(votes == c).sum(axis=0) for c in range(NUM_CLASSES)], axis=1)
    return _vote_rows_to_labels(onehot.astype(np.float64), votes, priority, eps=0.5)


def _compositions(total: int, parts: int) -> Iterable[tuple[int, ...]]:
    """All tuples of ``parts`` non-negative ints summing to ``total``."""
    for dividers in itertools.combinations(range(total + parts - 1), parts - 1):
        prev = -1
        ks = []
        for d in dividers:
            ks.append(d - prev - 1)
            prev = d
        ks.append(total + parts - 2 - prev)
        yield tuple(ks)


def search_weights(
    matrix_dev: PredictionMatrix,
    gold_dev: Sequence[int | Label] | None,
    grid_step: Fraction | str = Fraction(1, 20),
    priority_order: Sequence[str] | None = None,
) -> WeightSearchResult:
    """Exhaustive simplex grid search for the best weighted-vote weights.

    Enumerates every weight vector whose entries are multiples of
    ``grid_step`` and sum to 1, scores each by dev macro F1, and returns
    the maximizer.  F1 ties prefer (1) the point closest to uniform
    weights, then (2) the lexicographically smallest weight tuple in model
    order; ties at the uniform point itself cannot overfit a corner of the
    simplex.  The exact uniform vector is always evaluated, even when the
    grid does not contain it.
    """
    if gold_dev is None or len(gold_dev) == 0:
        raise ValueError("weight search requires dev gold labels")
    if len(gold_dev) != matrix_dev.num_examples:
        raise ValueError(
            f"gold has {len(gold_dev)} labels for {matrix_dev.num_examples} examples"
        )
    step = Fraction(grid_step)
    if step.numerator != 1 or step.denominator < 1:
        raise ValueError(f"grid_step must be 1/q for integer q >= 1, got {step}")
    q = step.denominator
    m = matrix_dev.num_models
    gold = np.asarray([int(g) for g in gold_dev], dtype=np.int64)
    votes = matrix_dev.labels
    priority = _priority_positions(matrix_dev, priority_order)

    # (M, N*3) one-hot ballots: scores for a weight row are one mat-vec.
    n = matrix_dev.num_examples
    onehot = np.zeros((m, n, NUM_CLASSES), dtype=np.float64)
    for i in range(m):
        onehot[i, np.arange(n), votes[i]] = 1.0
    onehot_flat = onehot.reshape(m, n * NUM_CLASSES)

    # Integer tie-break keys: squared distance to uniform scaled by (qM)^2,
    # computed exactly, plus the lexicographic weight tuple.
    best_f1 = -1.0
    best_key: tuple[object, ...] | None = None
    best_weights: tuple[float, ...] | None = None
    evaluations = 0

    def consider(weight_row: np.ndarray, dist2, lex: tuple) -> None:
        nonlocal best_f1, best_key, best_weights, evaluations
        evaluations += 1
        scores = (weight_row @ onehot_flat).reshape(n, NUM_CLASSES)
        pred = _vote_rows_to_labels(scores, votes, priority, eps=TIE_EPS)
        f1 = macro_f1_from_arrays(pred, gold)
        if (
            best_key is None
            or f1 > best_f1
            or (f1 == best_f1 and (dist2, lex) < best_key)
        ):
            best_f1 = f1
            best_key = (dist2, lex)
            best_weights = tuple(float(w) for w in weight_row)

    uniform_on_grid = q % m == 0
    for ks in _compositions(q, m):
        weight_row = np.array(ks, dtype=np.float64) / q
        dist2 = sum((m * k - q) ** 2 for k in ks)
        consider(weight_row, dist2, ks)
    if not uniform_on_grid:
        consider(np.full(m, 1.0 / m), 0, tuple(Fraction(1, m) for _ in range(m)))

    assert best_weights is not None
    return WeightSearchResult(
        best_weights=WeightVector(dict(zip(matrix_dev.model_ids, best_weights))),
        best_dev_macro_f1=best_f1,
        grid_step=step,
        evaluations=evaluations,
    )


def subset_ensembles(
    matrix: PredictionMatrix,
    gold: Sequence[int | Label],
    priority_order: Sequence[str] | None = None,
) -> list[SubsetResult]:
    """Hard-vote dev macro F1 for every non-empty model subset.

    Priority is the full-ensemble order restricted to each subset.  Rows
    are sorted by F1 descending, then subset size ascending, then subset
    composition in model order.
    """
    m = matrix.num_models
    if m > MAX_SUBSET_MODELS:
        raise ValueError(f"subset exploration is capped at {MAX_SUBSET_MODELS} models, got {m}")
    if len(gold) != matrix.num_examples:
        raise ValueError(f"gold has {len(gold)} labels for {matrix.num_examples} examples")
    gold_arr = np.asarray([int(g) for g in gold], dtype=np.int64)
    priority = _priority_positions(matrix, priority_order)

    results = []
    order_keys = []
    for bits in range(1, 2**m):
        positions = [i for i in range(m) if bits >> i & 1]
        sub_votes = matrix.labels[positions]
        sub_priority = [positions.index(p) for p in priority if p in positions]
        pred = _hard_vote_labels(sub_votes, sub_priority)
        f1 = macro_f1_from_arrays(pred, gold_arr)
        results.append(
            SubsetResult(model_ids=tuple(matrix.model_ids[i] for i in positions), macro_f1=f1)
        )
        order_keys.append((-f1, len(positions), tuple(positions)))

    order = sorted(range(len(results)), key=lambda i: order_keys[i])
    return [results[i] for i in order]


def agreement_matrix(matrix: PredictionMatrix) -> np.ndarray:
    """Fraction of examples on which each model pair emits the same label."""
    m = matrix.num_models
    out = np.ones((m, m), dtype=np.float64)
    for i in range(m):
        for j in range(i + 1, m):
            frac = float(np.mean(matrix.labels[i] == matrix.labels[j]))
            out[i, j] = out[j, i] = frac
    return out


def render_subset_table(results: Sequence[SubsetResult]) -> str:
    """Aligned-text table of subset scores."""
    width = max([len("models")] + [len(", ".join(r.model_ids)) for r in results]) + 2
    lines = [f"{'models':<{width}}{'size':>5}{'macro_f1':>10}"]
    lines.append("-" * (width + 15))
    for r in results:
        lines.append(f"{', '.join(r.model_ids):<{width}}{r.size:>5}{r.macro_f1:>10.4f}")
    return "\n".join(lines)


def subset_table_csv(results: Sequence[SubsetResult]) -> str:
    lines = ["models,size,macro_f1"]
    for r in results:
        lines.append(f"\"{' '.join(r.model_ids)}\",{r.size},{r.macro_f1!r}")
    return "\n".join(lines) + "\n"
