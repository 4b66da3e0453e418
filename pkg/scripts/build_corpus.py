#!/usr/bin/env python3
"""Regenerate the bundled training corpus at src/vforge/data/corpus.txt.

The corpus is synthetic news-style text (one article per line) produced by
the same deterministic generator the test suites use. Roughly 110k words at
the default settings; the default n-gram scorer trains on it at import time
of the CLI, so keep it fast to parse and fixed across runs.
"""

from __future__ import annotations

import os
import random
import sys

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, ROOT)

from tests import textgen  # noqa: E402

TARGET_WORDS = 110_000
SEED = 20240811
OUT = os.path.join(ROOT, "src", "vforge", "data", "corpus.txt")


def main() -> int:
    rng = random.Random(SEED)
    lines: list[str] = []
    words = 0
    while words < TARGET_WORDS:
        text = textgen.article(rng, min_words=80, max_words=400)
        lines.append(text)
        words += len(text.split())
    os.makedirs(os.path.dirname(OUT), exist_ok=True)
    with open(OUT, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {len(lines)} articles, {words} words to {OUT}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
