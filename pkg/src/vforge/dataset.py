"""Labeled dataset assembly, validation, stratified splitting, and JSONL IO."""

from __future__ import annotations

import json
import math
import os
import random
import tempfile
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .errors import (
    DataError,
    DuplicateIdError,
    EmptyDatasetError,
    InvariantViolationError,
    SchemaError,
)
from .negation import edits_from_meta, invert_edits
from .text import negation_occurrences, tokenize

LABELS = ("real", "fake")
SCENARIOS = ("qa_extension", "modification", "vanilla_extension", "full_generation")

REQUIRED_META = {
    "qa_extension": ("question", "answer"),
    "modification": ("m",),
    "vanilla_extension": ("g_actual",),
    "full_generation": (),
}

_FIELDS = ("id", "text", "label", "scenario", "meta")


@dataclass(frozen=True)
class LabeledExample:
    id: str
    text: str
    label: str
    scenario: str
    meta: dict = field(default_factory=dict)

    def to_json_obj(self) -> dict:
        return {
            "id": self.id,
            "text": self.text,
            "label": self.label,
            "scenario": self.scenario,
            "meta": self.meta,
        }


@dataclass(frozen=True)
class Dataset:
    examples: tuple[LabeledExample, ...]

    def __len__(self) -> int:
        return len(self.examples)

    def __iter__(self) -> Iterator[LabeledExample]:
        return iter(self.examples)

    def summary(self) -> dict[str, int]:
        counts = {label: 0 for label in LABELS}
        for ex in self.examples:
            counts[ex.label] += 1
        return counts


@dataclass(frozen=True)
class DatasetSplit:
    train: tuple[LabeledExample, ...]
    eval: tuple[LabeledExample, ...]
    seed: int
    eval_fraction: float


def _validate_example(ex: LabeledExample) -> None:
    if ex.label not in LABELS:
        raise InvariantViolationError(ex.id, f"unknown label {ex.label!r}")
    if ex.scenario not in SCENARIOS:
        raise InvariantViolationError(ex.id, f"unknown scenario {ex.scenario!r}")
    if not isinstance(ex.meta, dict):
        raise InvariantViolationError(ex.id, "meta must be a map")
    for key in REQUIRED_META[ex.scenario]:
        if key not in ex.meta:
            raise InvariantViolationError(ex.id, f"meta missing required key {key!r}")


def _validate_modification_pair(ex: LabeledExample, by_id: dict[str, LabeledExample]) -> None:
    """Fake modification examples carrying edits must reconstruct their source."""
    if "edits" not in ex.meta:
        return
    source_id = ex.meta.get("source")
    if source_id is None:
        raise InvariantViolationError(ex.id, "edits present but no source id")
    original = by_id.get(source_id)
    if original is None:
        raise InvariantViolationError(ex.id, f"paired original {source_id!r} not in dataset")
    try:
        edits = edits_from_meta(ex.meta["edits"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvariantViolationError(ex.id, f"malformed edits: {exc}") from exc
    if invert_edits(ex.text, edits) != original.text:
        raise InvariantViolationError(ex.id, "edits do not reconstruct the original text")
    before = len(negation_occurrences(tokenize(original.text)))
    after = len(negation_occurrences(tokenize(ex.text)))
    if before != after:
        raise InvariantViolationError(ex.id, f"negation count changed from {before} to {after}")


def assemble(examples: Iterable[LabeledExample]) -> Dataset:
    collected = tuple(examples)
    by_id: dict[str, LabeledExample] = {}
    for ex in collected:
        if ex.id in by_id:
            raise DuplicateIdError(f"duplicate example id {ex.id!r}")
        by_id[ex.id] = ex
    for ex in collected:
        _validate_example(ex)
    for ex in collected:
        if ex.scenario == "modification" and ex.label == "fake":
            _validate_modification_pair(ex, by_id)
    return Dataset(examples=collected)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def split(dataset: Dataset, eval_fraction: float = 0.3, seed: int = 0) -> DatasetSplit:
    if len(dataset) == 0:
        raise EmptyDatasetError("cannot split an empty dataset")
    if not 0.0 < eval_fraction < 1.0:
        raise DataError(f"eval_fraction must be in (0, 1), got {eval_fraction}")

    total_eval = _round_half_up(eval_fraction * len(dataset))
    classes: dict[str, list[int]] = {}
    for i, ex in enumerate(dataset.examples):
        classes.setdefault(ex.label, []).append(i)

    quotas: dict[str, int] = {}
    exact: dict[str, float] = {}
    for label in sorted(classes):
        exact[label] = eval_fraction * len(classes[label])
        quotas[label] = _round_half_up(exact[label])

    # nudge quotas so the eval side matches the overall rounded size, staying
    # within one example of each class's exact share
    while sum(quotas.values()) > total_eval:
        label = max(sorted(quotas), key=lambda lb: quotas[lb] - exact[lb])
        quotas[label] -= 1
    while sum(quotas.values()) < total_eval:
        label = min(sorted(quotas), key=lambda lb: quotas[lb] - exact[lb])
        quotas[label] += 1

    rng = random.Random(seed)
    eval_ids: set[int] = set()
    for label in sorted(classes):
        indices = list(classes[label])
        rng.shuffle(indices)
        eval_ids.update(indices[:quotas[label]])

    train = tuple(ex for i, ex in enumerate(dataset.examples) if i not in eval_ids)
    evalset = tuple(ex for i, ex in enumerate(dataset.examples) if i in eval_ids)
    return DatasetSplit(train=train, eval=evalset, seed=seed, eval_fraction=eval_fraction)


def write_jsonl(dataset: Dataset, path: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            for ex in dataset.examples:
                fh.write(json.dumps(ex.to_json_obj(), ensure_ascii=False) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_jsonl(path: str) -> Dataset:
    examples: list[LabeledExample] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(lineno, f"invalid JSON: {exc}") from exc
            if not isinstance(obj, dict):
                raise SchemaError(lineno, "line is not a JSON object")
            missing = [k for k in _FIELDS if k not in obj]
            if missing:
                raise SchemaError(lineno, f"missing fields {missing}")
            extra = [k for k in obj if k not in _FIELDS]
            if extra:
                raise SchemaError(lineno, f"unexpected fields {extra}")
            if not isinstance(obj["id"], str) or not isinstance(obj["text"], str):
                raise SchemaError(lineno, "id and text must be strings")
            if obj["label"] not in LABELS:
                raise SchemaError(lineno, f"unknown label {obj['label']!r}")
            if obj["scenario"] not in SCENARIOS:
                raise SchemaError(lineno, f"unknown scenario {obj['scenario']!r}")
            if not isinstance(obj["meta"], dict):
                raise SchemaError(lineno, "meta must be an object")
            examples.append(
                LabeledExample(
                    id=obj["id"],
                    text=obj["text"],
                    label=obj["label"],
                    scenario=obj["scenario"],
                    meta=obj["meta"],
                )
            )
    return assemble(examples)


def read_articles_dir(path: str) -> list[tuple[str, str]]:
    """Load (id, text) pairs from every .txt file in a directory, sorted by name."""
    if not os.path.isdir(path):
        raise DataError(f"not a directory: {path}")
    pairs: list[tuple[str, str]] = []
    for name in sorted(os.listdir(path)):
        if not name.endswith(".txt"):
            continue
        full = os.path.join(path, name)
        with open(full, "r", encoding="utf-8") as fh:
            pairs.append((name[:-4], fh.read()))
    if not pairs:
        raise DataError(f"no .txt articles found in {path}")
    return pairs


def read_questions_tsv(path: str) -> dict[str, tuple[str, str]]:
    """Load id -> (question, gold_answer) rows from a tab-separated file."""
    rows: dict[str, tuple[str, str]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.rstrip("\n")
            if not stripped.strip():
                continue
            parts = stripped.split("\t")
            if len(parts) != 3:
                raise SchemaError(lineno, f"expected 3 tab-separated fields, got {len(parts)}")
            article_id, question, gold = parts
            if article_id in rows:
                raise SchemaError(lineno, f"duplicate question for article {article_id!r}")
            rows[article_id] = (question, gold)
    if not rows:
        raise DataError(f"no questions found in {path}")
    return rows
