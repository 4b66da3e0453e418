"""Command-line entry points.

Subcommands: ``modify`` (negation-flip attack over a directory of articles),
``extend`` (QA or free-running continuation attack), ``eval`` (detector
evaluation with report files and figures), and ``serve`` (annotation web
service). Exit codes: 0 success, 1 bad or empty input data, 2 external
service failure, 64 usage error.
"""

from __future__ import annotations

import argparse
import os
import random
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from importlib import resources
from typing import Sequence

from . import adapters, annotation, dataset, evaluation, extension, figures, negation, report
from .errors import (
    AdapterError,
    ArticleTooShortError,
    BadConfigError,
    DataError,
    EmptyGenerationError,
    GeneratorEmptyError,
    InsufficientNegationsError,
    NoEligiblePositionsError,
    RealTooShortError,
    SingleClassError,
    TooFewSentencesError,
    VforgeError,
)
from .ngram import load_model, train_ngram
from .server import build_server, default_port, serve_forever
from .text import tokenize

EXIT_OK = 0
EXIT_DATA = 1
EXIT_EXTERNAL = 2
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _warn(message: str) -> None:
    print(f"warning: {message}", file=sys.stderr)


def _http_config() -> adapters.HttpConfig:
    return adapters.HttpConfig(token=os.environ.get(adapters.ENV_TOKEN))


def bundled_corpus_path():
    return resources.files("vforge").joinpath("data/corpus.txt")


def default_scorer(model_path: str | None = None):
    """The stock next-token scorer: a saved model if given, otherwise an
    order-3 model trained on the bundled corpus."""
    if model_path is not None:
        return load_model(model_path)
    text = bundled_corpus_path().read_text(encoding="utf-8")
    docs = [tokenize(line) for line in text.splitlines() if line.strip()]
    return train_ngram(docs)


def _map_jobs(fn, items, jobs: int):
    if jobs <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


# --- modify -----------------------------------------------------------------

def cmd_modify(args) -> int:
    if args.m < 2 or args.m % 2 != 0:
        raise UsageError(f"--m must be an even integer >= 2, got {args.m}")
    if args.k < args.m // 2:
        raise UsageError(f"--k must be at least m/2, got {args.k}")
    articles = dataset.read_articles_dir(args.articles)
    if args.scorer == "remote":
        scorer = adapters.ScorerClient(
            adapters.env_endpoint(adapters.ENV_SCORER_URL), _http_config()
        )
    else:
        scorer = default_scorer(args.model)

    def work(item):
        index, (stem, text) = item
        doc = tokenize(text)
        cfg = negation.ModificationConfig(m=args.m, K=args.k, seed=args.seed + index)
        try:
            return stem, negation.modify_article(doc, cfg, scorer), None
        except (InsufficientNegationsError, NoEligiblePositionsError) as exc:
            return stem, None, str(exc)

    results = _map_jobs(work, list(enumerate(articles)), args.jobs)

    examples: list[dataset.LabeledExample] = []
    skipped = 0
    for stem, result, reason in results:
        if result is None:
            skipped += 1
            _warn(f"skipping {stem}: {reason}")
            continue
        real_id = f"{stem}-real"
        examples.append(
            dataset.LabeledExample(
                id=real_id,
                text=result.original.text,
                label="real",
                scenario="modification",
                meta={"m": args.m},
            )
        )
        examples.append(
            dataset.LabeledExample(
                id=f"{stem}-fake",
                text=result.modified.text,
                label="fake",
                scenario="modification",
                meta={
                    "m": args.m,
                    "source": real_id,
                    "edits": negation.edits_to_meta(result.edits),
                },
            )
        )
    if not examples:
        print("error: no articles could be modified", file=sys.stderr)
        return EXIT_DATA
    ds = dataset.assemble(examples)
    dataset.write_jsonl(ds, args.out)
    print(f"wrote {len(ds)} examples ({skipped} articles skipped) to {args.out}")
    return EXIT_OK


# --- extend -------------------------------------------------------------------

def cmd_extend(args) -> int:
    if args.mode == "qa" and not args.questions:
        raise UsageError("--questions is required in qa mode")
    articles = dataset.read_articles_dir(args.articles)
    generator = adapters.GeneratorClient(
        adapters.env_endpoint(adapters.ENV_GENERATOR_URL), _http_config()
    )
    sampling = extension.SamplingParams(temperature=args.temperature, top_k=args.top_k)
    if args.mode == "qa":
        return _extend_qa(args, articles, generator, sampling)
    return _extend_vanilla(args, articles, generator, sampling)


def _extend_qa(args, articles, generator, sampling) -> int:
    questions = dataset.read_questions_tsv(args.questions)

    def work(item):
        stem, text = item
        pair = questions.get(stem)
        if pair is None:
            return stem, None, "no question for this article"
        question, gold = pair
        doc = tokenize(text)
        try:
            ext = extension.qa_extend(doc, question, generator, sampling)
        except (TooFewSentencesError, EmptyGenerationError, GeneratorEmptyError) as exc:
            return stem, None, str(exc)
        return stem, (ext, gold), None

    results = _map_jobs(work, articles, args.jobs)

    tasks: list[annotation.AnnotationTask] = []
    skipped = 0
    for stem, payload, reason in results:
        if payload is None:
            skipped += 1
            _warn(f"skipping {stem}: {reason}")
            continue
        ext, gold = payload
        tasks.append(
            annotation.AnnotationTask(
                task_id=stem,
                kind="veracity",
                article=ext.article.text,
                question=ext.question,
                answer=ext.answer,
                meta={
                    "answer_word_count": tokenize(ext.answer).n_words,
                    "removed_sentence_index": ext.removed_sentence_index,
                    "gold_answer": gold,
                },
            )
        )
    if not tasks:
        print("error: no annotation tasks could be produced", file=sys.stderr)
        return EXIT_DATA
    if args.double_fraction > 0:
        rng = random.Random(args.seed)
        n_double = min(len(tasks), int(args.double_fraction * len(tasks) + 0.5))
        for i in sorted(rng.sample(range(len(tasks)), n_double)):
            tasks[i] = replace(tasks[i], quota=2)
    annotation.write_tasks_jsonl(tasks, args.out)
    print(f"wrote {len(tasks)} annotation tasks ({skipped} articles skipped) to {args.out}")
    return EXIT_OK


def _extend_vanilla(args, articles, generator, sampling) -> int:
    cfg = extension.ExtensionConfig(
        g_target=args.g, prefix_words=args.prefix_words, sampling=sampling
    )

    def work(item):
        stem, text = item
        doc = tokenize(text)
        try:
            extended, fraction = extension.vanilla_extend(doc, cfg, generator)
            matched = extension.length_match_truncate(doc, extended)
        except (ArticleTooShortError, RealTooShortError, GeneratorEmptyError) as exc:
            return stem, None, str(exc)
        return stem, (extended, fraction, matched), None

    results = _map_jobs(work, articles, args.jobs)

    examples: list[dataset.LabeledExample] = []
    skipped = 0
    for stem, payload, reason in results:
        if payload is None:
            skipped += 1
            _warn(f"skipping {stem}: {reason}")
            continue
        extended, fraction, matched = payload
        machine_words = extended.n_words - args.prefix_words
        examples.append(
            dataset.LabeledExample(
                id=f"{stem}-real",
                text=matched.text,
                label="real",
                scenario="vanilla_extension",
                meta={"g_actual": 0.0},
            )
        )
        examples.append(
            dataset.LabeledExample(
                id=f"{stem}-fake",
                text=extended.text,
                label="fake",
                scenario="vanilla_extension",
                meta={"g_actual": fraction, "extension_words": machine_words},
            )
        )
    if not examples:
        print("error: no articles could be extended", file=sys.stderr)
        return EXIT_DATA
    ds = dataset.assemble(examples)
    dataset.write_jsonl(ds, args.out)
    print(f"wrote {len(ds)} examples ({skipped} articles skipped) to {args.out}")
    return EXIT_OK


# --- eval -----------------------------------------------------------------

def _report_base(path: str) -> str:
    return path[:-5] if path.endswith(".json") else path


def cmd_eval(args) -> int:
    ds = dataset.read_jsonl(args.dataset)
    sp = dataset.split(ds, eval_fraction=args.eval_fraction, seed=args.split_seed)
    golds = [ex.label for ex in sp.eval]

    scores: list[float] | None = None
    if args.detector == "length-baseline":
        preds = evaluation.length_predictions(sp.train, sp.eval)
        scores = evaluation.length_scores(sp.train, sp.eval)
    elif args.detector == "majority":
        preds = evaluation.majority_predictions(sp.train, sp.eval)
    else:
        client = adapters.DetectorClient(
            adapters.env_endpoint(adapters.ENV_DETECTOR_URL), _http_config()
        )
        responses = client.detect_many([ex.text for ex in sp.eval], concurrency=args.jobs)
        preds = [r.label for r in responses]
        if all(r.score is not None for r in responses):
            scores = [r.score for r in responses]

    result = evaluation.metrics(evaluation.confusion(preds, golds))
    if scores is not None:
        try:
            points, auc = evaluation.roc(scores, golds)
            result = replace(result, roc=points, auc=auc)
        except SingleClassError:
            pass

    base = _report_base(args.report)
    extra = {
        "detector": args.detector,
        "dataset": args.dataset,
        "split_seed": args.split_seed,
        "n_train": len(sp.train),
        "n_eval": len(sp.eval),
    }
    report.write_report_json(result, args.report, extra=extra)
    table = report.format_table({args.detector: result})
    report.write_table({args.detector: result}, base + ".txt")
    figures.save_confusion_figure(result.matrix, base + "_confusion.png")
    if result.roc:
        report.write_roc_csv(result.roc, base + "_roc.csv")
        figures.save_roc_figure(result.roc, result.auc, base + "_roc.png")

    with_fraction = [
        (pred, float(ex.meta["g_actual"]))
        for pred, ex in zip(preds, sp.eval)
        if "g_actual" in ex.meta
    ]
    if with_fraction:
        bins = evaluation.fraction_curve(
            [p for p, _ in with_fraction], [f for _, f in with_fraction]
        )
        report.write_fraction_csv(bins, base + "_fractions.csv")
        figures.save_fraction_figure(bins, base + "_fractions.png")

    print(table, end="")
    return EXIT_OK


# --- serve ------------------------------------------------------------------

def cmd_serve(args) -> int:
    tasks = annotation.load_tasks_jsonl(args.tasks)
    journal = os.path.abspath(args.journal)
    static_dir = args.static
    if static_dir is None and os.path.isdir(os.path.join(os.getcwd(), "frontend", "dist")):
        static_dir = os.path.join(os.getcwd(), "frontend", "dist")
    store = annotation.AnnotationStore(tasks, journal_path=journal)
    port = args.port if args.port is not None else default_port()
    try:
        server = build_server(store, port=port, host=args.host, static_dir=static_dir)
    except OSError as exc:
        store.close()
        print(f"error: cannot bind port {port}: {exc}", file=sys.stderr)
        return EXIT_EXTERNAL
    print(f"serving {len(tasks)} tasks on http://{args.host}:{server.server_address[1]}")
    try:
        serve_forever(server)
    except KeyboardInterrupt:
        server.server_close()
        store.close()
    return EXIT_OK


# --- parser ------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="vforge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("modify", help="negation-flip attack over a directory of articles")
    p.add_argument("articles", help="directory of .txt articles")
    p.add_argument("out", help="output dataset JSONL path")
    p.add_argument("--m", type=int, required=True, help="total edits per article (even)")
    p.add_argument("--k", type=int, default=100, help="candidate insertion positions sampled")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scorer", choices=("ngram", "remote"), default="ngram")
    p.add_argument("--model", default=None, help="path to a saved n-gram model")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_modify)

    p = sub.add_parser("extend", help="continuation attack (qa or vanilla mode)")
    p.add_argument("articles", help="directory of .txt articles")
    p.add_argument("out", help="output path (tasks JSONL in qa mode, dataset JSONL otherwise)")
    p.add_argument("--mode", choices=("qa", "vanilla"), required=True)
    p.add_argument("--questions", default=None, help="TSV of id, question, reference answer")
    p.add_argument("--g", type=float, default=0.1, help="target machine-text fraction")
    p.add_argument("--prefix-words", type=int, default=500)
    p.add_argument("--temperature", type=float, default=1.0)
    p.add_argument("--top-k", type=int, default=40)
    p.add_argument("--double-fraction", type=float, default=0.0,
                   help="fraction of qa tasks that require two annotators")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("eval", help="evaluate a detector on a labeled dataset")
    p.add_argument("dataset", help="dataset JSONL path")
    p.add_argument("--detector", choices=("remote", "length-baseline", "majority"),
                   default="length-baseline")
    p.add_argument("--split-seed", type=int, default=0)
    p.add_argument("--eval-fraction", type=float, default=0.3)
    p.add_argument("--report", required=True, help="output report JSON path")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", help="run the annotation web service")
    p.add_argument("--tasks", required=True, help="annotation tasks JSONL path")
    p.add_argument("--journal", default="labels.jsonl", help="submission journal path")
    p.add_argument("--port", type=int, default=None,
                   help="port (default: VFORGE_PORT or 8471)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--static", default=None, help="directory with the web client bundle")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BadConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AdapterError as exc:
        print(f"external service error: {exc}", file=sys.stderr)
        return EXIT_EXTERNAL
    except (DataError, VforgeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    raise SystemExit(main())
