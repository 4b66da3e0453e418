"""Machine-extension attacks: QA template prompting and vanilla auto-completion.

The QA pipeline prompts a generator with the full article plus a fixed
question template, takes the first generated sentence as the answer, and
removes the article sentence most similar to question-plus-answer under
TF-IDF cosine. The vanilla pipeline appends generated sentences to a
500-word prefix until the machine-token share first reaches a target
fraction at a sentence boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

from .errors import (
    ArticleTooShortError,
    BadConfigError,
    EmptyGenerationError,
    EmptyQuestionError,
    GeneratorEmptyError,
    RealTooShortError,
    TooFewSentencesError,
    ZeroLengthError,
)
from .text import Document, most_similar_sentence, tokenize, truncate_words

QUESTION_PREFIX = "\nWe attempt to answer: "
ANSWER_SUFFIX = "\nAnswer:"

GENERATION_BATCH_SENTENCES = 4


class Generator(Protocol):
    """Text continuation source (typically a remote model behind HTTP)."""

    def generate(self, prompt: str, max_sentences: int, temperature: float, top_k: int) -> str:
        ...


@dataclass(frozen=True)
class SamplingParams:
    temperature: float = 1.0
    top_k: int = 40


@dataclass(frozen=True)
class ExtensionConfig:
    g_target: float = 0.1
    prefix_words: int = 500
    sampling: SamplingParams = field(default_factory=SamplingParams)

    def validate(self) -> None:
        if not 0.0 < self.g_target <= 1.0:
            raise BadConfigError(f"g_target must be in (0, 1], got {self.g_target}")
        if self.prefix_words < 1:
            raise BadConfigError(f"prefix_words must be >= 1, got {self.prefix_words}")


@dataclass(frozen=True)
class QaExtension:
    article: Document
    question: str
    answer: str
    prompt: str
    removed_sentence_index: int


def build_qa_prompt(article: Document, question: str) -> str:
    if not question.strip():
        raise EmptyQuestionError("question must be non-empty")
    return article.text + QUESTION_PREFIX + question + ANSWER_SUFFIX


def extract_answer(generated: str) -> str:
    if not generated.strip():
        raise EmptyGenerationError("generator returned no text")
    doc = tokenize(generated)
    return doc.sentence_text(0).strip()


def remove_answer_sentence(article: Document, question: str, answer: str) -> tuple[Document, int]:
    if len(article.sentences) < 2:
        raise TooFewSentencesError(
            f"need at least 2 sentences, got {len(article.sentences)}"
        )
    query_doc = tokenize(question + " " + answer)
    query = [query_doc.token_text(i).lower() for i in query_doc.word_token_indices()]
    index = most_similar_sentence(article, query)

    start, end = article.sentences[index]
    if index + 1 < len(article.sentences):
        cut_end = article.sentences[index + 1][0]
        cut_start = start
    else:
        cut_start = article.sentences[index - 1][1]
        cut_end = end
    text = article.text[:cut_start] + article.text[cut_end:]
    return tokenize(text), index


def qa_extend(
    article: Document,
    question: str,
    generator: Generator,
    sampling: SamplingParams = SamplingParams(),
) -> QaExtension:
    """Full QA pipeline: prompt, take the first generated sentence, drop the
    most similar article sentence."""
    prompt = build_qa_prompt(article, question)
    generated = generator.generate(
        prompt, max_sentences=1, temperature=sampling.temperature, top_k=sampling.top_k
    )
    if not generated.strip():
        raise GeneratorEmptyError("generator produced no sentences")
    answer = extract_answer(generated)
    reduced, removed_index = remove_answer_sentence(article, question, answer)
    return QaExtension(
        article=reduced,
        question=question,
        answer=answer,
        prompt=prompt,
        removed_sentence_index=removed_index,
    )


def machine_fraction(human_tokens: int, machine_tokens: int) -> float:
    if human_tokens + machine_tokens <= 0:
        raise ZeroLengthError("need at least one token")
    return machine_tokens / (human_tokens + machine_tokens)


def ratio_to_original(human_tokens: int, machine_tokens: int) -> float:
    if human_tokens <= 0:
        raise ZeroLengthError("need at least one human token")
    return machine_tokens / human_tokens


def vanilla_extend(
    article: Document, cfg: ExtensionConfig, generator: Generator
) -> tuple[Document, float]:
    cfg.validate()
    if article.n_words < cfg.prefix_words:
        raise ArticleTooShortError(
            f"article has {article.n_words} words, prefix needs {cfg.prefix_words}"
        )
    prefix = truncate_words(article, cfg.prefix_words)
    human = prefix.n_words

    text = prefix.text
    machine = 0
    fraction = 0.0
    while True:
        generated = generator.generate(
            text,
            max_sentences=GENERATION_BATCH_SENTENCES,
            temperature=cfg.sampling.temperature,
            top_k=cfg.sampling.top_k,
        )
        gen_doc = tokenize(generated)
        if not gen_doc.sentences or gen_doc.n_words == 0:
            raise GeneratorEmptyError("generator produced no sentences")
        crossed = False
        for j in range(len(gen_doc.sentences)):
            sentence = gen_doc.sentence_text(j).strip()
            sent_words = sum(
                1 for i in gen_doc.sentence_token_indices(j) if gen_doc.word_flags[i]
            )
            text = text + " " + sentence
            machine += sent_words
            fraction = machine_fraction(human, machine)
            if fraction >= cfg.g_target:
                crossed = True
                break
        if crossed:
            break
    return tokenize(text), fraction


def length_match_truncate(real: Document, fake: Document) -> Document:
    if real.n_words < fake.n_words:
        raise RealTooShortError(
            f"real article has {real.n_words} words, needs {fake.n_words}"
        )
    return truncate_words(real, fake.n_words)
