"""Detector-evaluation mathematics: confusion counts, per-class metrics,
ROC/AUC, threshold and majority baselines, slicing, annotator agreement,
token-overlap F1, and the machine-fraction sensitivity curve.

The fake class is the positive class throughout. Degenerate 0/0 cells
resolve to 0 for precision, recall, and F1.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import (
    EmptyInputError,
    LengthMismatchError,
    SingleClassError,
)
from .dataset import LabeledExample
from .text import tokenize

FAKE = "fake"
REAL = "real"


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class EvalReport:
    fake_precision: float
    fake_recall: float
    fake_f1: float
    real_precision: float
    real_recall: float
    real_f1: float
    macro_f1: float
    accuracy: float
    matrix: ConfusionMatrix
    roc: tuple[tuple[float, float], ...] = ()
    auc: float | None = None

    def to_dict(self) -> dict:
        return {
            "fake_precision": self.fake_precision,
            "fake_recall": self.fake_recall,
            "fake_f1": self.fake_f1,
            "real_precision": self.real_precision,
            "real_recall": self.real_recall,
            "real_f1": self.real_f1,
            "macro_f1": self.macro_f1,
            "accuracy": self.accuracy,
            "matrix": {
                "tp": self.matrix.tp,
                "fp": self.matrix.fp,
                "fn": self.matrix.fn,
                "tn": self.matrix.tn,
            },
            "roc": [list(p) for p in self.roc],
            "auc": self.auc,
        }


def confusion(preds: Sequence[str], golds: Sequence[str]) -> ConfusionMatrix:
    if len(preds) != len(golds):
        raise LengthMismatchError(f"{len(preds)} predictions vs {len(golds)} golds")
    if not preds:
        raise EmptyInputError("need at least one prediction")
    tp = fp = fn = tn = 0
    for p, g in zip(preds, golds):
        if g == FAKE:
            if p == FAKE:
                tp += 1
            else:
                fn += 1
        else:
            if p == FAKE:
                fp += 1
            else:
                tn += 1
    return ConfusionMatrix(tp=tp, fp=fp, fn=fn, tn=tn)


def _safe_div(num: float, den: float) -> float:
    return num / den if den > 0 else 0.0


def _f1(precision: float, recall: float) -> float:
    return _safe_div(2 * precision * recall, precision + recall)


def metrics(matrix: ConfusionMatrix) -> EvalReport:
    if matrix.total < 1:
        raise EmptyInputError("confusion matrix is empty")
    fake_p = _safe_div(matrix.tp, matrix.tp + matrix.fp)
    fake_r = _safe_div(matrix.tp, matrix.tp + matrix.fn)
    real_p = _safe_div(matrix.tn, matrix.tn + matrix.fn)
    real_r = _safe_div(matrix.tn, matrix.tn + matrix.fp)
    fake_f1 = _f1(fake_p, fake_r)
    real_f1 = _f1(real_p, real_r)
    return EvalReport(
        fake_precision=fake_p,
        fake_recall=fake_r,
        fake_f1=fake_f1,
        real_precision=real_p,
        real_recall=real_r,
        real_f1=real_f1,
        macro_f1=(fake_f1 + real_f1) / 2,
        accuracy=(matrix.tp + matrix.tn) / matrix.total,
        matrix=matrix,
    )


def roc(scores: Sequence[float], golds: Sequence[str]) -> tuple[tuple[tuple[float, float], ...], float]:
    """Operating points at every distinct threshold plus (0,0) and (1,1);
    AUC by the trapezoid rule (equals Mann-Whitney with ties counted half)."""
    if len(scores) != len(golds):
        raise LengthMismatchError(f"{len(scores)} scores vs {len(golds)} golds")
    n_pos = sum(1 for g in golds if g == FAKE)
    n_neg = len(golds) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClassError("ROC needs at least one example of each class")

    points: list[tuple[float, float]] = [(0.0, 0.0)]
    tp = fp = 0
    paired = sorted(zip(scores, golds), key=lambda t: -t[0])
    i = 0
    while i < len(paired):
        threshold = paired[i][0]
        while i < len(paired) and paired[i][0] == threshold:
            if paired[i][1] == FAKE:
                tp += 1
            else:
                fp += 1
            i += 1
        points.append((fp / n_neg, tp / n_pos))
    if points[-1] != (1.0, 1.0):
        points.append((1.0, 1.0))

    auc = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        auc += (x1 - x0) * (y0 + y1) / 2
    return tuple(points), auc


def _pair_statistic(scores: Sequence[float], golds: Sequence[str]) -> float:
    """Brute-force Mann-Whitney statistic; quadratic, used by oracle tests."""
    pos = [s for s, g in zip(scores, golds) if g == FAKE]
    neg = [s for s, g in zip(scores, golds) if g != FAKE]
    wins = 0.0
    for p in pos:
        for n in neg:
            if p > n:
                wins += 1.0
            elif p == n:
                wins += 0.5
    return wins / (len(pos) * len(neg))


def _example_length(ex: LabeledExample) -> int:
    """Word-count feature for the length baseline: the extension's length when
    recorded, the full text length otherwise."""
    for key in ("answer_word_count", "extension_words"):
        if key in ex.meta:
            return int(ex.meta[key])
    return tokenize(ex.text).n_words


def _apply_threshold(length: int, threshold: float, fake_if_ge: bool) -> str:
    if fake_if_ge:
        return FAKE if length >= threshold else REAL
    return FAKE if length <= threshold else REAL


def fit_length_threshold(train: Sequence[LabeledExample]) -> tuple[int, bool]:
    """Best (threshold, fake_if_ge) rule on the training set. Ties prefer the
    smaller threshold and the >= direction."""
    if not train:
        raise EmptyInputError("empty training set")
    train_labels = {ex.label for ex in train}
    if len(train_labels) < 2:
        raise SingleClassError("length baseline needs both classes in training data")

    lengths = [_example_length(ex) for ex in train]
    golds = [ex.label for ex in train]
    # candidate thresholds: every observed length, plus one past the maximum so
    # each direction can degenerate to a constant predictor
    candidates = sorted(set(lengths))
    candidates.append(candidates[-1] + 1)

    best = None
    for fake_if_ge in (True, False):
        for threshold in candidates:
            correct = sum(
                1
                for length, gold in zip(lengths, golds)
                if _apply_threshold(length, threshold, fake_if_ge) == gold
            )
            key = (-correct, threshold, not fake_if_ge)
            if best is None or key < best[0]:
                best = (key, threshold, fake_if_ge)
    _, threshold, fake_if_ge = best
    return threshold, fake_if_ge


def length_predictions(
    train: Sequence[LabeledExample], eval: Sequence[LabeledExample]
) -> list[str]:
    threshold, fake_if_ge = fit_length_threshold(train)
    return [_apply_threshold(_example_length(ex), threshold, fake_if_ge) for ex in eval]


def length_scores(
    train: Sequence[LabeledExample], eval: Sequence[LabeledExample]
) -> list[float]:
    """Continuous fake-score per eval example, oriented so higher means more
    likely fake under the fitted rule."""
    _, fake_if_ge = fit_length_threshold(train)
    sign = 1.0 if fake_if_ge else -1.0
    return [sign * _example_length(ex) for ex in eval]


def length_baseline(
    train: Sequence[LabeledExample], eval: Sequence[LabeledExample]
) -> EvalReport:
    preds = length_predictions(train, eval)
    return metrics(confusion(preds, [ex.label for ex in eval]))


def majority_predictions(
    train: Sequence[LabeledExample], eval: Sequence[LabeledExample]
) -> list[str]:
    if not train:
        raise EmptyInputError("empty training set")
    counts = Counter(ex.label for ex in train)
    majority = FAKE if counts[FAKE] > counts[REAL] else REAL
    return [majority] * len(eval)


def majority_baseline(
    train: Sequence[LabeledExample], eval: Sequence[LabeledExample]
) -> EvalReport:
    preds = majority_predictions(train, eval)
    return metrics(confusion(preds, [ex.label for ex in eval]))


def slice_examples(
    examples: Sequence[LabeledExample], predicate: Callable[[dict], bool]
) -> list[LabeledExample]:
    return [ex for ex in examples if predicate(ex.meta)]


def answer_at_most(n: int) -> Callable[[dict], bool]:
    """Built-in slice predicate: answers of at most n words."""

    def predicate(meta: dict) -> bool:
        return "answer_word_count" in meta and int(meta["answer_word_count"]) <= n

    return predicate


def cohen_kappa(a: Sequence[str], b: Sequence[str]) -> float:
    if len(a) != len(b):
        raise LengthMismatchError(f"{len(a)} vs {len(b)} labels")
    if not a:
        raise EmptyInputError("need at least one pair of labels")
    n = len(a)
    observed = sum(1 for x, y in zip(a, b) if x == y) / n
    counts_a = Counter(a)
    counts_b = Counter(b)
    expected = sum(
        (counts_a[label] / n) * (counts_b[label] / n) for label in set(a) | set(b)
    )
    if expected >= 1.0:
        return 1.0
    return (observed - expected) / (1.0 - expected)


def token_overlap_f1(pred: str, gold: str) -> float:
    pred_tokens = _word_multiset(pred)
    gold_tokens = _word_multiset(gold)
    if not pred_tokens or not gold_tokens:
        return 0.0
    overlap = sum((pred_tokens & gold_tokens).values())
    precision = overlap / sum(pred_tokens.values())
    recall = overlap / sum(gold_tokens.values())
    return _f1(precision, recall)


def _word_multiset(text: str) -> Counter[str]:
    doc = tokenize(text)
    return Counter(doc.token_text(i).lower() for i in doc.word_token_indices())


@dataclass(frozen=True)
class FractionBin:
    low: float
    high: float
    real_rate: float | None
    n: int


def fraction_curve(
    preds: Sequence[str], fractions: Sequence[float], bins: int = 10
) -> list[FractionBin]:
    if len(preds) != len(fractions):
        raise LengthMismatchError(f"{len(preds)} predictions vs {len(fractions)} fractions")
    if bins < 1:
        raise EmptyInputError("need at least one bin")
    counts = [0] * bins
    real_counts = [0] * bins
    for pred, frac in zip(preds, fractions):
        index = min(int(frac * bins), bins - 1)
        counts[index] += 1
        if pred == REAL:
            real_counts[index] += 1
    rows = []
    for i in range(bins):
        rate = real_counts[i] / counts[i] if counts[i] else None
        rows.append(FractionBin(low=i / bins, high=(i + 1) / bins, real_rate=rate, n=counts[i]))
    return rows
