"""Negation-inversion attack: delete negations, reinsert them at scored positions.

The attack removes m/2 "not"/"no" tokens chosen uniformly at random, then
inserts m/2 negations at the highest-scoring sampled positions, where a
position's score is the probability of the negation word times the
probability of the word that follows it. The total negation count never
changes, and every edit is recorded as an exact text splice so the original
article can be reconstructed byte for byte.
"""

from __future__ import annotations

import random
from bisect import bisect_left
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import (
    BadConfigError,
    IneligiblePositionError,
    InsufficientCandidatesError,
    InsufficientNegationsError,
    InvariantViolationError,
    NoEligiblePositionsError,
)
from .ngram import Scorer
from .text import Document, negation_occurrences, tokenize

NEGATION_CHOICES = ("not", "no")


@dataclass(frozen=True)
class ModificationConfig:
    m: int
    K: int = 100
    seed: int = 0

    def validate(self) -> None:
        if self.m < 2 or self.m % 2 != 0:
            raise BadConfigError(f"m must be an even integer >= 2, got {self.m}")
        if self.K < self.m // 2:
            raise BadConfigError(f"K must be at least m/2, got K={self.K} for m={self.m}")


@dataclass(frozen=True)
class EditRecord:
    kind: str
    token_position: int
    word: str
    score: float | None
    offset: int
    removed: str
    inserted: str


@dataclass(frozen=True)
class ModifiedArticle:
    original: Document
    modified: Document
    edits: tuple[EditRecord, ...]


def invert_edits(text: str, edits: Iterable[EditRecord]) -> str:
    """Undo recorded edits in reverse order, restoring the pre-edit text."""
    for e in reversed(list(edits)):
        text = text[:e.offset] + e.removed + text[e.offset + len(e.inserted):]
    return text


def _sentence_start_token(doc: Document, pos: int) -> bool:
    return pos == 0 or doc.sentence_of[pos - 1] != doc.sentence_of[pos]


def _next_word_in_sentence(doc: Document, pos: int) -> int | None:
    sentence = doc.sentence_of[pos]
    for i in range(pos + 1, len(doc.tokens)):
        if doc.sentence_of[i] != sentence:
            return None
        if doc.word_flags[i]:
            return i
    return None


def _deletion_splice(doc: Document, pos: int) -> tuple[int, str, str]:
    """Build the single splice removing token `pos` plus one adjacent space,
    capitalizing the next word when a sentence-initial negation goes away."""
    text = doc.text
    start, end = doc.tokens[pos]
    if end < len(text) and text[end].isspace():
        cut_start, cut_end = start, end + 1
    elif start > 0 and text[start - 1].isspace():
        cut_start, cut_end = start - 1, end
    else:
        cut_start, cut_end = start, end

    if _sentence_start_token(doc, pos):
        follower = _next_word_in_sentence(doc, pos)
        if follower is not None:
            fs = doc.tokens[follower][0]
            ch = text[fs]
            if ch.islower():
                removed = text[cut_start:fs + 1]
                inserted = text[cut_end:fs] + ch.upper()
                return cut_start, removed, inserted
    return cut_start, text[cut_start:cut_end], ""


def delete_negations(
    doc: Document, count: int, rng: random.Random
) -> tuple[Document, list[EditRecord]]:
    occurrences = negation_occurrences(doc)
    if count > len(occurrences):
        raise InsufficientNegationsError(available=len(occurrences), requested=count)
    if count == 0:
        return doc, []

    chosen = sorted(rng.sample(occurrences, count), reverse=True)
    edits: list[EditRecord] = []
    current = doc
    for pos in chosen:
        offset, removed, inserted = _deletion_splice(current, pos)
        edits.append(
            EditRecord(
                kind="deletion",
                token_position=pos,
                word=current.token_text(pos).lower(),
                score=None,
                offset=offset,
                removed=removed,
                inserted=inserted,
            )
        )
        text = current.text
        current = tokenize(text[:offset] + inserted + text[offset + len(removed):])
    return current, edits


def sample_candidate_positions(doc: Document, K: int, rng: random.Random) -> list[int]:
    eligible = doc.word_token_indices()
    if len(eligible) < 2:
        raise NoEligiblePositionsError("need at least two word tokens to place a negation")
    return sorted(rng.sample(eligible, min(K, len(eligible))))


def _context_terms(doc: Document, pos: int) -> list[str]:
    return [doc.token_text(i).lower() for i in doc.word_token_indices() if i < pos]


def score_insertion(doc: Document, pos: int, word: str, scorer: Scorer) -> float:
    if pos < 0 or pos >= len(doc.tokens) or not doc.word_flags[pos]:
        raise IneligiblePositionError(f"position {pos} is not a word token")
    context = _context_terms(doc, pos)
    follower = doc.token_text(pos).lower()
    p_word = scorer.next_token_prob(context, word)
    p_follow = scorer.next_token_prob(context + [word], follower)
    return p_word * p_follow


def _insertion_splice(doc: Document, pos: int, word: str) -> tuple[int, str, str]:
    start = doc.tokens[pos][0]
    if _sentence_start_token(doc, pos):
        ch = doc.text[start]
        return start, ch, word.capitalize() + " " + ch.lower()
    return start, "", word + " "


def insert_negations(
    doc: Document,
    count: int,
    cfg: ModificationConfig,
    scorer: Scorer,
    rng: random.Random,
) -> tuple[Document, list[EditRecord]]:
    positions = sample_candidate_positions(doc, cfg.K, rng)
    if count > len(positions):
        raise InsufficientCandidatesError(
            f"need {count} distinct positions, only {len(positions)} sampled"
        )

    word_idx = doc.word_token_indices()
    terms = [doc.token_text(i).lower() for i in word_idx]
    scored: list[tuple[float, int, int, str]] = []
    for pos in positions:
        context = terms[:bisect_left(word_idx, pos)]
        follower = doc.token_text(pos).lower()
        for rank, word in enumerate(NEGATION_CHOICES):
            score = scorer.next_token_prob(context, word) * scorer.next_token_prob(
                context + [word], follower
            )
            scored.append((score, pos, rank, word))
    scored.sort(key=lambda item: (-item[0], item[1], item[2]))

    chosen: list[tuple[float, int, str]] = []
    used: set[int] = set()
    for score, pos, _rank, word in scored:
        if pos in used:
            continue
        used.add(pos)
        chosen.append((score, pos, word))
        if len(chosen) == count:
            break

    edits: list[EditRecord] = []
    text = doc.text
    for score, pos, word in sorted(chosen, key=lambda item: -item[1]):
        offset, removed, inserted = _insertion_splice(doc, pos, word)
        edits.append(
            EditRecord(
                kind="insertion",
                token_position=pos,
                word=word,
                score=score,
                offset=offset,
                removed=removed,
                inserted=inserted,
            )
        )
        text = text[:offset] + inserted + text[offset + len(removed):]
    return tokenize(text), edits


def modify_article(doc: Document, cfg: ModificationConfig, scorer: Scorer) -> ModifiedArticle:
    cfg.validate()
    half = cfg.m // 2
    available = len(negation_occurrences(doc))
    if available < half:
        raise InsufficientNegationsError(available=available, requested=half)

    rng = random.Random(cfg.seed)
    deleted_doc, del_edits = delete_negations(doc, half, rng)
    final_doc, ins_edits = insert_negations(deleted_doc, half, cfg, scorer, rng)
    edits = tuple(del_edits + ins_edits)

    before = len(negation_occurrences(doc))
    after = len(negation_occurrences(final_doc))
    if after != before:
        raise InvariantViolationError("", f"negation count changed from {before} to {after}")
    if invert_edits(final_doc.text, edits) != doc.text:
        raise InvariantViolationError("", "recorded edits do not reconstruct the original text")
    return ModifiedArticle(original=doc, modified=final_doc, edits=edits)


def edits_to_meta(edits: Sequence[EditRecord]) -> list[dict]:
    return [
        {
            "kind": e.kind,
            "token_position": e.token_position,
            "word": e.word,
            "score": e.score,
            "offset": e.offset,
            "removed": e.removed,
            "inserted": e.inserted,
        }
        for e in edits
    ]


def edits_from_meta(items: Sequence[dict]) -> tuple[EditRecord, ...]:
    return tuple(
        EditRecord(
            kind=item["kind"],
            token_position=int(item["token_position"]),
            word=item["word"],
            score=item["score"],
            offset=int(item["offset"]),
            removed=item["removed"],
            inserted=item["inserted"],
        )
        for item in items
    )
