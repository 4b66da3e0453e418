"""Deterministic tokenization, sentence segmentation, and TF-IDF similarity.

All pipelines share these primitives.  Tokens are maximal runs of
letters/digits/apostrophes; every other non-space character is its own
token.  Sentences end after '.', '!' or '?' when followed by whitespace and
an upper-case letter (or end of text); a dot glued to a single letter, as in
"U.S.", never terminates.  Everything here is a pure function over immutable
values.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import EmptyDocumentError

Span = tuple[int, int]

_TOKEN_RE = re.compile(r"(?:[^\W_]|')+|\S")
_TERMINATORS = frozenset(".!?")


def _is_word(text: str) -> bool:
    return any(ch.isalnum() for ch in text)


@dataclass(frozen=True)
class Document:
    """Text plus token/sentence character spans.

    Invariants: token spans are non-overlapping and strictly increasing,
    reconstruct the text when joined with the original gap characters, and
    each token lies inside exactly one sentence span.
    """

    text: str
    tokens: tuple[Span, ...]
    sentences: tuple[Span, ...]
    sentence_of: tuple[int, ...] = field(repr=False)  # sentence index per token
    word_flags: tuple[bool, ...] = field(repr=False)  # True where token is a word

    def token_text(self, i: int) -> str:
        s, e = self.tokens[i]
        return self.text[s:e]

    def sentence_text(self, j: int) -> str:
        s, e = self.sentences[j]
        return self.text[s:e]

    def sentence_token_indices(self, j: int) -> list[int]:
        return [i for i, sj in enumerate(self.sentence_of) if sj == j]

    def word_token_indices(self) -> list[int]:
        return [i for i, w in enumerate(self.word_flags) if w]

    @property
    def n_words(self) -> int:
        return sum(self.word_flags)


def tokenize(text: str) -> Document:
    """Build a Document over ``text``; empty text has no tokens and no sentences."""
    spans = tuple(m.span() for m in _TOKEN_RE.finditer(text))
    word_flags = tuple(_is_word(text[s:e]) for s, e in spans)
    boundaries = _sentence_boundaries(text, spans)

    sentences: list[Span] = []
    sentence_of: list[int] = []
    start_tok = 0
    for end_tok in boundaries:  # end_tok: index one past the sentence's last token
        first = spans[start_tok]
        last = spans[end_tok - 1]
        sentences.append((first[0], last[1]))
        sentence_of.extend([len(sentences) - 1] * (end_tok - start_tok))
        start_tok = end_tok

    return Document(
        text=text,
        tokens=spans,
        sentences=tuple(sentences),
        sentence_of=tuple(sentence_of),
        word_flags=word_flags,
    )


def _sentence_boundaries(text: str, spans: Sequence[Span]) -> list[int]:
    """Token indices (exclusive) where each sentence ends."""
    if not spans:
        return []
    ends: list[int] = []
    for i, (s, e) in enumerate(spans):
        tok = text[s:e]
        if tok not in _TERMINATORS:
            continue
        if tok == "." and _is_abbreviation_dot(text, spans, i):
            continue
        if i == len(spans) - 1:
            ends.append(i + 1)
            continue
        nxt_s = spans[i + 1][0]
        gap = text[e:nxt_s]
        if gap and gap.isspace() and text[nxt_s].isupper():
            ends.append(i + 1)
    if not ends or ends[-1] != len(spans):
        ends.append(len(spans))
    return ends


def _is_abbreviation_dot(text: str, spans: Sequence[Span], i: int) -> bool:
    """True when the dot at token ``i`` directly follows a single letter ("U.S.")."""
    if i == 0:
        return False
    ps, pe = spans[i - 1]
    return pe == spans[i][0] and pe - ps == 1 and text[ps:pe].isalpha()


# --- negation detection -----------------------------------------------------

NEGATION_WORDS = frozenset({"not", "no"})


def negation_occurrences(doc: Document) -> list[int]:
    """Indices of tokens whose lower-cased text is exactly "not" or "no"."""
    return [
        i
        for i in range(len(doc.tokens))
        if doc.token_text(i).lower() in NEGATION_WORDS
    ]


# --- TF-IDF -----------------------------------------------------------------

def word_terms(doc: Document, sentence: int | None = None) -> list[str]:
    """Lower-cased word tokens of the document (or of one sentence)."""
    indices = range(len(doc.tokens)) if sentence is None else doc.sentence_token_indices(sentence)
    return [doc.token_text(i).lower() for i in indices if doc.word_flags[i]]


def normalize_terms(tokens: Iterable[str]) -> list[str]:
    """Lower-case and drop non-word tokens from an arbitrary token list."""
    return [t.lower() for t in tokens if _is_word(t)]


def tfidf_vector(
    tokens: Sequence[str],
    idf: Mapping[str, float],
    unknown_idf: float = 0.0,
) -> dict[str, float]:
    """Term -> count(term) * idf(term); terms absent from ``idf`` get ``unknown_idf``."""
    counts = Counter(tokens)
    return {t: c * idf.get(t, unknown_idf) for t, c in counts.items()}


def idf_from_sentences(doc: Document) -> dict[str, float]:
    """Per-sentence inverse document frequency: idf(t) = ln(N / df(t)).

    N is the sentence count and df(t) the number of sentences containing the
    term; only terms that occur somewhere in the document are returned.
    """
    n = len(doc.sentences)
    if n == 0:
        raise EmptyDocumentError("document has no sentences")
    df: Counter[str] = Counter()
    for j in range(n):
        for term in set(word_terms(doc, j)):
            df[term] += 1
    return {t: math.log(n / c) for t, c in df.items()}


def cosine_similarity(a: Mapping[str, float], b: Mapping[str, float]) -> float:
    """Standard cosine over sparse weight maps; 0.0 when either norm is zero."""
    if len(b) < len(a):
        a, b = b, a
    dot = sum(w * b.get(t, 0.0) for t, w in a.items())
    norm_a = math.sqrt(sum(w * w for w in a.values()))
    norm_b = math.sqrt(sum(w * w for w in b.values()))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return dot / (norm_a * norm_b)


def most_similar_sentence(doc: Document, query_tokens: Sequence[str]) -> int:
    """Sentence with maximal TF-IDF cosine to the query; lowest index on ties.

    Unknown query terms get idf ln(N), as if they occurred in one sentence.
    """
    n = len(doc.sentences)
    if n == 0:
        raise EmptyDocumentError("document has no sentences")
    idf = idf_from_sentences(doc)
    unknown = math.log(n) if n > 1 else 0.0
    query_vec = tfidf_vector(normalize_terms(query_tokens), idf, unknown_idf=unknown)
    best_index = 0
    best_score = -1.0
    for j in range(n):
        vec = tfidf_vector(word_terms(doc, j), idf)
        score = cosine_similarity(query_vec, vec)
        if score > best_score:
            best_index, best_score = j, score
    return best_index


# --- word-count operations ----------------------------------------------------

def truncate_words(doc: Document, n: int) -> Document:
    """Prefix document containing exactly min(n, total) word tokens.

    The cut lands just before word n+1, so punctuation trailing word n (e.g.
    a closing period) is kept; returns the document unchanged when it has at
    most ``n`` words.
    """
    if n < 0:
        raise ValueError("word count must be >= 0")
    if n == 0:
        return tokenize("")
    words = doc.word_token_indices()
    if n >= len(words):
        return doc
    cut = doc.tokens[words[n]][0]
    return tokenize(doc.text[:cut].rstrip())
