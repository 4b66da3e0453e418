"""Report serialization: JSON metrics dump, plain-text metrics table, ROC CSV."""

from __future__ import annotations

import json
import os
import tempfile
from typing import Mapping, Sequence

from .evaluation import EvalReport, FractionBin


def _atomic_write(path: str, content: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def report_to_json(report: EvalReport, extra: Mapping | None = None) -> str:
    payload = report.to_dict()
    if extra:
        payload.update(extra)
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


def write_report_json(report: EvalReport, path: str, extra: Mapping | None = None) -> None:
    _atomic_write(path, report_to_json(report, extra))


def format_table(rows: Mapping[str, EvalReport]) -> str:
    """Fixed-width table: fake-class precision/recall/F1, macro-F1, accuracy."""
    header = f"{'detector':<24} {'precision':>9} {'recall':>9} {'f1':>9} {'macro_f1':>9} {'accuracy':>9}"
    lines = [header, "-" * len(header)]
    for name, r in rows.items():
        lines.append(
            f"{name:<24} {r.fake_precision:>9.3f} {r.fake_recall:>9.3f} "
            f"{r.fake_f1:>9.3f} {r.macro_f1:>9.3f} {r.accuracy:>9.3f}"
        )
    return "\n".join(lines) + "\n"


def write_table(rows: Mapping[str, EvalReport], path: str) -> None:
    _atomic_write(path, format_table(rows))


def roc_csv(points: Sequence[tuple[float, float]]) -> str:
    lines = ["fpr,tpr"]
    lines.extend(f"{fpr:.10g},{tpr:.10g}" for fpr, tpr in points)
    return "\n".join(lines) + "\n"


def write_roc_csv(points: Sequence[tuple[float, float]], path: str) -> None:
    _atomic_write(path, roc_csv(points))


def fraction_csv(rows: Sequence[FractionBin]) -> str:
    lines = ["bin_low,bin_high,real_rate,n"]
    for row in rows:
        rate = "" if row.real_rate is None else f"{row.real_rate:.10g}"
        lines.append(f"{row.low:.10g},{row.high:.10g},{rate},{row.n}")
    return "\n".join(lines) + "\n"


def write_fraction_csv(rows: Sequence[FractionBin], path: str) -> None:
    _atomic_write(path, fraction_csv(rows))
