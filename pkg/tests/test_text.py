from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vforge.errors import EmptyDocumentError
from vforge.text import (
    Document,
    cosine_similarity,
    idf_from_sentences,
    most_similar_sentence,
    negation_occurrences,
    normalize_terms,
    tfidf_vector,
    tokenize,
    truncate_words,
    word_terms,
)

from .textgen import article


def token_texts(doc: Document) -> list[str]:
    return [doc.token_text(i) for i in range(len(doc.tokens))]


# --- tokenize ---------------------------------------------------------------

def test_empty_text():
    doc = tokenize("")
    assert doc.tokens == ()
    assert doc.sentences == ()


def test_basic_tokens_and_sentences():
    doc = tokenize("No. Not now.")
    assert token_texts(doc) == ["No", ".", "Not", "now", "."]
    assert len(doc.sentences) == 2
    assert doc.sentence_text(0) == "No."
    assert doc.sentence_text(1) == "Not now."


def test_abbreviation_dots_do_not_split():
    doc = tokenize("U.S. Capitol")
    assert token_texts(doc) == ["U", ".", "S", ".", "Capitol"]
    assert len(doc.sentences) == 1


def test_apostrophes_stay_in_word():
    doc = tokenize("don't stop")
    assert token_texts(doc) == ["don't", "stop"]


def test_punctuation_tokens_are_single_chars():
    doc = tokenize("Wait -- what?!")
    assert token_texts(doc) == ["Wait", "-", "-", "what", "?", "!"]


def test_lowercase_follower_does_not_split():
    doc = tokenize("v. smith went home. then slept.")
    assert len(doc.sentences) == 1


def test_token_spans_strictly_increasing():
    doc = tokenize("One, two; three.")
    flat = [x for span in doc.tokens for x in span]
    assert flat == sorted(flat)
    assert all(e > s for s, e in doc.tokens)


def test_every_token_in_exactly_one_sentence():
    doc = tokenize('He said. "Go home." Then what?')
    assert len(doc.sentence_of) == len(doc.tokens)
    for i, j in enumerate(doc.sentence_of):
        ts, te = doc.tokens[i]
        ss, se = doc.sentences[j]
        assert ss <= ts and te <= se


@given(st.text(max_size=400))
@settings(max_examples=200, deadline=None)
def test_roundtrip_spans_rebuild_text(text):
    doc = tokenize(text)
    rebuilt = []
    prev_end = 0
    for s, e in doc.tokens:
        rebuilt.append(text[prev_end:s])
        rebuilt.append(text[s:e])
        prev_end = e
    rebuilt.append(text[prev_end:])
    assert "".join(rebuilt) == text


@given(st.text(max_size=400))
@settings(max_examples=200, deadline=None)
def test_tokens_cover_all_nonspace(text):
    doc = tokenize(text)
    covered = set()
    for s, e in doc.tokens:
        covered.update(range(s, e))
    for i, ch in enumerate(text):
        assert (i in covered) == (not ch.isspace())


# --- negation_occurrences -----------------------------------------------------

def test_negation_single_match():
    assert negation_occurrences(tokenize("Not a chance")) == [0]


def test_negation_needs_whole_token():
    assert negation_occurrences(tokenize("nothing here")) == []


def test_negation_positions():
    doc = tokenize("No, not now, no")
    assert token_texts(doc) == ["No", ",", "not", "now", ",", "no"]
    assert negation_occurrences(doc) == [0, 2, 5]


@given(st.text(alphabet="nNoOtT ab.", max_size=120))
@settings(max_examples=150, deadline=None)
def test_negation_matches_linear_scan(text):
    doc = tokenize(text)
    expected = [
        i for i in range(len(doc.tokens)) if doc.token_text(i).lower() in ("not", "no")
    ]
    assert negation_occurrences(doc) == expected


# --- tfidf ------------------------------------------------------------------

def test_tfidf_count_times_idf():
    assert tfidf_vector(["a", "a", "b"], {"a": 1.0, "b": 2.0}) == {"a": 2.0, "b": 2.0}


def test_tfidf_empty_tokens():
    assert tfidf_vector([], {"a": 1.0}) == {}


def test_tfidf_zero_idf_annihilates():
    assert tfidf_vector(["a"], {"a": 0.0}) == {"a": 0.0}


def test_tfidf_unknown_term_fallback():
    assert tfidf_vector(["x"], {"a": 1.0}, unknown_idf=0.7) == {"x": 0.7}


def test_idf_single_sentence_all_zero():
    doc = tokenize("one two three")
    assert set(idf_from_sentences(doc).values()) == {0.0}


def test_idf_two_sentences():
    doc = tokenize("Apple pear. Apple fig.")
    idf = idf_from_sentences(doc)
    assert idf["apple"] == 0.0
    assert idf["pear"] == pytest.approx(math.log(2))
    assert idf["fig"] == pytest.approx(math.log(2))
    assert "absent" not in idf


def test_idf_empty_doc_raises():
    with pytest.raises(EmptyDocumentError):
        idf_from_sentences(tokenize("   "))


def test_idf_nonnegative_zero_iff_everywhere():
    rng = random.Random(7)
    for _ in range(20):
        doc = tokenize(article(rng, 30, 120))
        n = len(doc.sentences)
        idf = idf_from_sentences(doc)
        for term, w in idf.items():
            df = sum(1 for j in range(n) if term in word_terms(doc, j))
            assert w >= 0.0
            assert (w == 0.0) == (df == n)


# --- cosine -----------------------------------------------------------------

def test_cosine_identical():
    v = {"a": 1.5, "b": 0.5}
    assert cosine_similarity(v, v) == pytest.approx(1.0)


def test_cosine_disjoint():
    assert cosine_similarity({"a": 1.0}, {"b": 1.0}) == 0.0


def test_cosine_partial_overlap():
    assert cosine_similarity({"a": 1.0, "b": 1.0}, {"a": 1.0}) == pytest.approx(1 / math.sqrt(2))


def test_cosine_zero_norm():
    assert cosine_similarity({}, {"a": 1.0}) == 0.0
    assert cosine_similarity({"a": 0.0}, {"a": 1.0}) == 0.0


# --- most_similar_sentence ----------------------------------------------------

def test_most_similar_verbatim_sentence():
    doc = tokenize("Apples grow on trees. Rivers flow to sea. Cats chase mice.")
    idx = most_similar_sentence(doc, normalize_terms(["Rivers", "flow", "to", "sea"]))
    assert idx == 1


def test_most_similar_disjoint_query_ties_to_zero():
    doc = tokenize("Apples grow. Rivers flow.")
    assert most_similar_sentence(doc, ["zzz", "qqq"]) == 0


def brute_force_most_similar(doc: Document, query: list[str]) -> int:
    n = len(doc.sentences)
    idf = idf_from_sentences(doc)
    unknown = math.log(n) if n > 1 else 0.0
    qv = tfidf_vector(normalize_terms(query), idf, unknown_idf=unknown)
    scores = [cosine_similarity(qv, tfidf_vector(word_terms(doc, j), idf)) for j in range(n)]
    return max(range(n), key=lambda j: (scores[j], -j))


def test_most_similar_matches_bruteforce_on_crafted_doc():
    doc = tokenize(
        "The dam project needs more concrete. "
        "Funding for the dam was approved. "
        "The weather stayed dry all week."
    )
    query = normalize_terms(["dam", "funding", "approved"])
    assert most_similar_sentence(doc, query) == brute_force_most_similar(doc, query)
    assert most_similar_sentence(doc, query) == 1


def test_most_similar_matches_bruteforce_fuzzed():
    rng = random.Random(13)
    for _ in range(50):
        doc = tokenize(article(rng, 30, 150))
        k = rng.randint(1, 8)
        query = [rng.choice("alpha beta budget plan vote no not the city".split()) for _ in range(k)]
        assert most_similar_sentence(doc, query) == brute_force_most_similar(doc, query)


def test_most_similar_empty_doc_raises():
    with pytest.raises(EmptyDocumentError):
        most_similar_sentence(tokenize(""), ["a"])


# --- truncate_words -----------------------------------------------------------

def test_truncate_zero_words():
    assert truncate_words(tokenize("Hello there."), 0).text == ""


def test_truncate_beyond_length_is_identity():
    doc = tokenize("One two three.")
    assert truncate_words(doc, 50) is doc


def test_truncate_keeps_trailing_punctuation():
    doc = tokenize("One two three. Four.")
    assert truncate_words(doc, 3).text == "One two three."


def test_truncate_word_count_property():
    rng = random.Random(5)
    for _ in range(30):
        doc = tokenize(article(rng, 20, 200))
        n = rng.randint(0, 250)
        out = truncate_words(doc, n)
        assert out.n_words == min(n, doc.n_words)


def test_truncate_negative_raises():
    with pytest.raises(ValueError):
        truncate_words(tokenize("a"), -1)
