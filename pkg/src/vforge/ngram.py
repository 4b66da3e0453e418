"""Interpolated n-gram language model used as the built-in next-token scorer.

The model mixes maximum-likelihood estimates of every order up to `order`,
with add-one smoothing at the unigram level over the vocabulary plus a
reserved unknown symbol. Interpolation weights are renormalized over the
levels whose context was observed in training, so the conditional
distribution always sums to one.
"""

from __future__ import annotations

import json
import os
import tempfile
from collections import Counter
from dataclasses import dataclass, field
from typing import Protocol, Sequence

from .errors import BadWeightsError, EmptyCorpusError, ModelFormatError
from .text import Document

MAGIC = "VFORGE-NGRAM-1"
UNKNOWN = "<unk>"

DEFAULT_ORDER = 3
DEFAULT_LAMBDAS = (0.1, 0.3, 0.6)


class Scorer(Protocol):
    """Anything that can assign a next-token probability."""

    def next_token_prob(self, context: Sequence[str], candidate: str) -> float:
        ...


@dataclass(frozen=True)
class NgramModel:
    order: int
    lambdas: tuple[float, ...]
    vocabulary: frozenset[str]
    counts: dict[tuple[str, ...], dict[str, int]]
    totals: dict[tuple[str, ...], int] = field(repr=False)

    def _unigram_prob(self, term: str) -> float:
        total = self.totals.get((), 0)
        count = self.counts.get((), {}).get(term, 0)
        return (count + 1) / (total + len(self.vocabulary) + 1)

    def next_token_prob(self, context: Sequence[str], candidate: str) -> float:
        cand = candidate.lower()
        if cand not in self.vocabulary:
            cand = UNKNOWN
        # only the last order-1 terms can ever enter a context key
        tail = context[max(0, len(context) - (self.order - 1)):] if self.order > 1 else []
        ctx = [t if t in self.vocabulary else UNKNOWN for t in (w.lower() for w in tail)]

        active: list[tuple[tuple[str, ...], float]] = []
        mass = 0.0
        for k in range(1, self.order + 1):
            weight = self.lambdas[k - 1]
            if k == 1:
                key: tuple[str, ...] = ()
            else:
                if len(ctx) < k - 1:
                    continue
                key = tuple(ctx[len(ctx) - (k - 1):])
                if key not in self.counts:
                    continue
            active.append((key, weight))
            mass += weight

        if mass <= 0.0:
            return self._unigram_prob(cand)

        prob = 0.0
        for key, weight in active:
            if key == ():
                level_p = self._unigram_prob(cand)
            else:
                level_p = self.counts[key].get(cand, 0) / self.totals[key]
            prob += (weight / mass) * level_p
        return prob


def _validate_lambdas(order: int, lambdas: Sequence[float]) -> tuple[float, ...]:
    weights = tuple(float(w) for w in lambdas)
    if len(weights) != order:
        raise BadWeightsError(f"expected {order} weights, got {len(weights)}")
    if any(w < 0 for w in weights):
        raise BadWeightsError("weights must be non-negative")
    if abs(sum(weights) - 1.0) > 1e-9:
        raise BadWeightsError(f"weights must sum to 1, got {sum(weights)}")
    return weights


def train_ngram(
    corpus: Sequence[Document],
    order: int = DEFAULT_ORDER,
    lambdas: Sequence[float] | None = None,
) -> NgramModel:
    if order < 1:
        raise BadWeightsError(f"order must be >= 1, got {order}")
    if lambdas is None:
        lambdas = DEFAULT_LAMBDAS if order == DEFAULT_ORDER else tuple([1.0 / order] * order)
    weights = _validate_lambdas(order, lambdas)
    if not corpus:
        raise EmptyCorpusError("training corpus is empty")

    counts: dict[tuple[str, ...], Counter[str]] = {}
    vocabulary: set[str] = set()
    for doc in corpus:
        seq = [doc.token_text(i).lower() for i in doc.word_token_indices()]
        vocabulary.update(seq)
        for length in range(order):
            for i in range(length, len(seq)):
                ctx = tuple(seq[i - length:i])
                bucket = counts.get(ctx)
                if bucket is None:
                    bucket = counts[ctx] = Counter()
                bucket[seq[i]] += 1

    if not vocabulary:
        raise EmptyCorpusError("training corpus contains no word tokens")

    frozen = {ctx: dict(c) for ctx, c in counts.items()}
    totals = {ctx: sum(c.values()) for ctx, c in counts.items()}
    return NgramModel(
        order=order,
        lambdas=weights,
        vocabulary=frozenset(vocabulary),
        counts=frozen,
        totals=totals,
    )


def next_token_prob(model: NgramModel, context: Sequence[str], candidate: str) -> float:
    return model.next_token_prob(context, candidate)


def save_model(model: NgramModel, path: str) -> None:
    payload = {
        "order": model.order,
        "lambdas": list(model.lambdas),
        "vocabulary": sorted(model.vocabulary),
        "counts": [[list(ctx), bucket] for ctx, bucket in sorted(model.counts.items())],
    }
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(MAGIC + "\n")
            json.dump(payload, fh, ensure_ascii=False)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_model(path: str) -> NgramModel:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != MAGIC:
            raise ModelFormatError(f"unrecognized model header {header!r}")
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"corrupt model payload: {exc}") from exc

    try:
        order = int(payload["order"])
        lambdas = tuple(float(w) for w in payload["lambdas"])
        vocabulary = frozenset(payload["vocabulary"])
        counts = {tuple(ctx): {t: int(c) for t, c in bucket.items()} for ctx, bucket in payload["counts"]}
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed model fields: {exc}") from exc

    totals = {ctx: sum(bucket.values()) for ctx, bucket in counts.items()}
    return NgramModel(order=order, lambdas=lambdas, vocabulary=vocabulary, counts=counts, totals=totals)
