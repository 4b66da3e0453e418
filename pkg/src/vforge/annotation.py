"""Human-labeling service core: task queue, durable submissions, agreement,
and export of annotator verdicts as a labeled dataset.

Submissions append to a JSONL journal and are acknowledged only after the
line is flushed to disk; restarting the service replays the journal. A task
is assigned to the annotator with the lowest pending task id, never twice to
the same annotator, and only while its answer quota (1, or 2 for the
double-annotation subset) is unmet.
"""

from __future__ import annotations

import json
import os
import re
import threading
import time
from dataclasses import dataclass, field
from typing import Sequence

from .dataset import LabeledExample
from .errors import (
    BadVerdictError,
    DuplicateSubmissionError,
    NoOverlapError,
    SchemaError,
    UnknownAnnotatorError,
    UnknownTaskError,
)
from .evaluation import cohen_kappa

KINDS = ("veracity", "provenance", "modification_check")

VERDICT_DOMAINS = {
    "veracity": ("true", "false", "nonsensical"),
    "provenance": ("real", "fake"),
    "modification_check": ("real", "modified"),
}

EXPORT_LABEL = {
    "veracity": {"true": "real", "false": "fake"},
    "provenance": {"real": "real", "fake": "fake"},
    "modification_check": {"real": "real", "modified": "fake"},
}

EXPORT_SCENARIO = {
    "veracity": "qa_extension",
    "provenance": "full_generation",
    "modification_check": "modification",
}


@dataclass(frozen=True)
class AnnotationTask:
    task_id: str
    kind: str
    article: str
    question: str | None = None
    answer: str | None = None
    highlight_spans: tuple[tuple[int, int], ...] | None = None
    quota: int = 1
    meta: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise SchemaError(0, f"task {self.task_id!r}: unknown kind {self.kind!r}")
        if self.kind == "veracity" and (self.question is None or self.answer is None):
            raise SchemaError(0, f"task {self.task_id!r}: veracity tasks need question and answer")
        if self.kind == "modification_check" and self.highlight_spans is None:
            raise SchemaError(0, f"task {self.task_id!r}: modification tasks need highlight spans")
        if self.quota not in (1, 2):
            raise SchemaError(0, f"task {self.task_id!r}: quota must be 1 or 2")

    def to_json_obj(self) -> dict:
        obj: dict = {
            "task_id": self.task_id,
            "kind": self.kind,
            "article": self.article,
            "quota": self.quota,
            "meta": self.meta,
        }
        if self.question is not None:
            obj["question"] = self.question
        if self.answer is not None:
            obj["answer"] = self.answer
        if self.highlight_spans is not None:
            obj["highlight_spans"] = [list(span) for span in self.highlight_spans]
        return obj


@dataclass(frozen=True)
class AnnotationRecord:
    task_id: str
    annotator_id: str
    verdict: str
    timestamp: float

    def to_json_obj(self) -> dict:
        return {
            "task_id": self.task_id,
            "annotator_id": self.annotator_id,
            "verdict": self.verdict,
            "timestamp": self.timestamp,
        }


@dataclass(frozen=True)
class AgreementReport:
    kappa: float
    n: int
    table: dict


@dataclass(frozen=True)
class ExportResult:
    examples: tuple[LabeledExample, ...]
    conflicts: tuple[str, ...]
    nonsense_rate: float | None


_NUMERIC_RUN = re.compile(r"(\d+)")


def _natural_key(task_id: str) -> tuple:
    parts = _NUMERIC_RUN.split(task_id)
    return tuple(int(p) if p.isdigit() else p for p in parts)


class AnnotationStore:
    def __init__(self, tasks: Sequence[AnnotationTask], journal_path: str | None = None):
        ordered = sorted(tasks, key=lambda t: _natural_key(t.task_id))
        self._tasks: dict[str, AnnotationTask] = {}
        for task in ordered:
            task.validate()
            if task.task_id in self._tasks:
                raise SchemaError(0, f"duplicate task id {task.task_id!r}")
            self._tasks[task.task_id] = task
        self._order = [t.task_id for t in ordered]
        self._records: list[AnnotationRecord] = []
        self._by_task: dict[str, list[AnnotationRecord]] = {}
        self._journal_path = journal_path
        self._journal_fh = None
        self._lock = threading.RLock()
        if journal_path and os.path.exists(journal_path):
            self._replay(journal_path)
        if journal_path:
            self._journal_fh = open(journal_path, "a", encoding="utf-8", newline="\n")

    # --- persistence ------------------------------------------------------

    def _replay(self, path: str) -> None:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                    record = AnnotationRecord(
                        task_id=obj["task_id"],
                        annotator_id=obj["annotator_id"],
                        verdict=obj["verdict"],
                        timestamp=float(obj["timestamp"]),
                    )
                except (KeyError, TypeError, ValueError) as exc:
                    raise SchemaError(lineno, f"bad journal line: {exc}") from exc
                self._admit(record)

    def _admit(self, record: AnnotationRecord) -> None:
        task = self._tasks.get(record.task_id)
        if task is None:
            raise UnknownTaskError(f"unknown task {record.task_id!r}")
        if record.verdict not in VERDICT_DOMAINS[task.kind]:
            raise BadVerdictError(
                f"verdict {record.verdict!r} invalid for {task.kind} task {record.task_id!r}"
            )
        if not record.annotator_id.strip():
            raise UnknownAnnotatorError("annotator id must be non-empty")
        for existing in self._by_task.get(record.task_id, ()):
            if existing.annotator_id == record.annotator_id:
                raise DuplicateSubmissionError(
                    f"annotator {record.annotator_id!r} already answered {record.task_id!r}"
                )
        self._records.append(record)
        self._by_task.setdefault(record.task_id, []).append(record)

    def close(self) -> None:
        with self._lock:
            if self._journal_fh:
                self._journal_fh.close()
                self._journal_fh = None

    # --- queue -----------------------------------------------------------

    def next_task(self, annotator_id: str) -> AnnotationTask | None:
        if not annotator_id.strip():
            raise UnknownAnnotatorError("annotator id must be non-empty")
        with self._lock:
            for task_id in self._order:
                task = self._tasks[task_id]
                answers = self._by_task.get(task_id, ())
                if len(answers) >= task.quota:
                    continue
                if any(r.annotator_id == annotator_id for r in answers):
                    continue
                return task
        return None

    def submit(self, record: AnnotationRecord) -> None:
        with self._lock:
            self._admit(record)
            if self._journal_fh:
                self._journal_fh.write(json.dumps(record.to_json_obj(), ensure_ascii=False) + "\n")
                self._journal_fh.flush()
                os.fsync(self._journal_fh.fileno())

    # --- reporting ---------------------------------------------------------

    def agreement(self) -> AgreementReport:
        with self._lock:
            pairs: list[tuple[str, str]] = []
            for task_id in self._order:
                task = self._tasks[task_id]
                if task.kind != "veracity":
                    continue
                answers = self._by_task.get(task_id, ())
                if len(answers) < 2:
                    continue
                a, b = answers[0].verdict, answers[1].verdict
                if a == "nonsensical" or b == "nonsensical":
                    continue
                pairs.append((a, b))
        if not pairs:
            raise NoOverlapError("no doubly-annotated tasks with true/false verdicts")
        table: dict[str, dict[str, int]] = {
            x: {y: 0 for y in ("true", "false")} for x in ("true", "false")
        }
        for a, b in pairs:
            table[a][b] += 1
        kappa = cohen_kappa([a for a, _ in pairs], [b for _, b in pairs])
        return AgreementReport(kappa=kappa, n=len(pairs), table=table)

    def export(self, kind: str) -> ExportResult:
        if kind not in KINDS:
            raise BadVerdictError(f"unknown task kind {kind!r}")
        label_map = EXPORT_LABEL[kind]
        scenario = EXPORT_SCENARIO[kind]
        examples: list[LabeledExample] = []
        conflicts: list[str] = []
        annotated = 0
        nonsense = 0
        with self._lock:
            for task_id in self._order:
                task = self._tasks[task_id]
                if task.kind != kind:
                    continue
                answers = self._by_task.get(task_id, ())
                if not answers:
                    continue
                annotated += 1
                verdicts = [r.verdict for r in answers]
                if any(v == "nonsensical" for v in verdicts):
                    nonsense += 1
                    continue
                if len(set(verdicts)) > 1:
                    conflicts.append(task_id)
                    continue
                meta = dict(task.meta)
                if task.question is not None:
                    meta.setdefault("question", task.question)
                if task.answer is not None:
                    meta.setdefault("answer", task.answer)
                examples.append(
                    LabeledExample(
                        id=task_id,
                        text=task.article,
                        label=label_map[verdicts[0]],
                        scenario=scenario,
                        meta=meta,
                    )
                )
        rate = (nonsense / annotated) if (kind == "veracity" and annotated) else None
        return ExportResult(
            examples=tuple(examples), conflicts=tuple(conflicts), nonsense_rate=rate
        )

    def stats(self) -> dict:
        with self._lock:
            done = sum(
                1
                for task_id in self._order
                if len(self._by_task.get(task_id, ())) >= self._tasks[task_id].quota
            )
            return {
                "tasks_total": len(self._order),
                "tasks_done": done,
                "submissions": len(self._records),
                "annotators": sorted({r.annotator_id for r in self._records}),
            }


def make_record(task_id: str, annotator_id: str, verdict: str) -> AnnotationRecord:
    return AnnotationRecord(
        task_id=task_id, annotator_id=annotator_id, verdict=verdict, timestamp=time.time()
    )


def load_tasks_jsonl(path: str) -> list[AnnotationTask]:
    tasks: list[AnnotationTask] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(lineno, f"invalid JSON: {exc}") from exc
            if not isinstance(obj, dict):
                raise SchemaError(lineno, "task line is not a JSON object")
            try:
                spans = obj.get("highlight_spans")
                task = AnnotationTask(
                    task_id=str(obj["task_id"]),
                    kind=obj["kind"],
                    article=obj["article"],
                    question=obj.get("question"),
                    answer=obj.get("answer"),
                    highlight_spans=(
                        tuple((int(s), int(e)) for s, e in spans) if spans is not None else None
                    ),
                    quota=int(obj.get("quota", 1)),
                    meta=obj.get("meta", {}),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise SchemaError(lineno, f"bad task fields: {exc}") from exc
            try:
                task.validate()
            except SchemaError as exc:
                raise SchemaError(lineno, exc.reason) from exc
            tasks.append(task)
    return tasks


def write_tasks_jsonl(tasks: Sequence[AnnotationTask], path: str) -> None:
    import tempfile

    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            for task in tasks:
                fh.write(json.dumps(task.to_json_obj(), ensure_ascii=False) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
