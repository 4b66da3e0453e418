"""Command-line behavior: exit codes, outputs, determinism, remote wiring."""

import json
import os
import random
import socket
import subprocess
import sys
import urllib.request

import pytest

from vforge import cli
from vforge.annotation import load_tasks_jsonl
from vforge.dataset import Dataset, LabeledExample, read_jsonl, write_jsonl
from vforge.negation import edits_from_meta, invert_edits

from .mockserver import MockModelServer, Outcome
from .textgen import article, article_with_negations


@pytest.fixture()
def articles_dir(tmp_path):
    rng = random.Random(11)
    root = tmp_path / "articles"
    root.mkdir()
    for name in ("alpha", "beta", "gamma"):
        text = article_with_negations(rng, min_negations=3, min_words=60, max_words=120)
        (root / f"{name}.txt").write_text(text, encoding="utf-8")
    return str(root)


@pytest.fixture()
def mock_server():
    server = MockModelServer()
    server.url = server.start()
    yield server
    server.stop()


def qa_dataset(tmp_path, n=20, seed=3):
    """Synthetic labeled QA examples: fake answers run long, real ones short."""
    rng = random.Random(seed)
    examples = []
    for i in range(n):
        label = "fake" if i % 2 == 0 else "real"
        words = rng.randint(15, 25) if label == "fake" else rng.randint(5, 11)
        examples.append(
            LabeledExample(
                id=f"ex{i:03d}",
                text=f"Article body {i}. It has several sentences.",
                label=label,
                scenario="qa_extension",
                meta={
                    "question": f"Question {i}?",
                    "answer": " ".join(["word"] * words),
                    "answer_word_count": words,
                },
            )
        )
    path = str(tmp_path / "dataset.jsonl")
    write_jsonl(Dataset(examples=tuple(examples)), path)
    return path


class TestUsage:
    def test_odd_m_is_usage_error(self, articles_dir, tmp_path, capsys):
        code = cli.main(["modify", articles_dir, str(tmp_path / "o.jsonl"), "--m", "3"])
        assert code == 64
        assert "even" in capsys.readouterr().err

    def test_k_below_half_m(self, articles_dir, tmp_path):
        out = str(tmp_path / "o.jsonl")
        assert cli.main(["modify", articles_dir, out, "--m", "6", "--k", "2"]) == 64

    def test_qa_without_questions(self, articles_dir, tmp_path):
        out = str(tmp_path / "o.jsonl")
        assert cli.main(["extend", articles_dir, out, "--mode", "qa"]) == 64

    def test_unknown_subcommand(self):
        assert cli.main(["frobnicate"]) == 64

    def test_missing_scorer_env_is_config_error(self, articles_dir, tmp_path, monkeypatch):
        monkeypatch.delenv("VFORGE_SCORER_URL", raising=False)
        out = str(tmp_path / "o.jsonl")
        code = cli.main(
            ["modify", articles_dir, out, "--m", "2", "--scorer", "remote"]
        )
        assert code == 64


class TestModify:
    def test_writes_valid_pairs(self, articles_dir, tmp_path, capsys):
        out = str(tmp_path / "out.jsonl")
        code = cli.main(["modify", articles_dir, out, "--m", "2", "--seed", "7"])
        assert code == 0
        ds = read_jsonl(out)
        assert len(ds) == 6
        by_id = {ex.id: ex for ex in ds}
        for stem in ("alpha", "beta", "gamma"):
            fake = by_id[f"{stem}-fake"]
            real = by_id[f"{stem}-real"]
            assert fake.label == "fake" and real.label == "real"
            edits = edits_from_meta(fake.meta["edits"])
            assert invert_edits(fake.text, edits) == real.text

    def test_same_seed_byte_identical(self, articles_dir, tmp_path):
        out1 = str(tmp_path / "a.jsonl")
        out2 = str(tmp_path / "b.jsonl")
        assert cli.main(["modify", articles_dir, out1, "--m", "2", "--seed", "5"]) == 0
        assert cli.main(["modify", articles_dir, out2, "--m", "2", "--seed", "5"]) == 0
        assert open(out1, "rb").read() == open(out2, "rb").read()

    def test_different_seed_differs(self, articles_dir, tmp_path):
        out1 = str(tmp_path / "a.jsonl")
        out2 = str(tmp_path / "b.jsonl")
        assert cli.main(["modify", articles_dir, out1, "--m", "2", "--seed", "5"]) == 0
        assert cli.main(["modify", articles_dir, out2, "--m", "2", "--seed", "6"]) == 0
        assert open(out1, "rb").read() != open(out2, "rb").read()

    def test_jobs_flag_keeps_output_stable(self, articles_dir, tmp_path):
        out1 = str(tmp_path / "a.jsonl")
        out2 = str(tmp_path / "b.jsonl")
        assert cli.main(["modify", articles_dir, out1, "--m", "2", "--seed", "5"]) == 0
        assert (
            cli.main(
                ["modify", articles_dir, out2, "--m", "2", "--seed", "5", "--jobs", "4"]
            )
            == 0
        )
        assert open(out1, "rb").read() == open(out2, "rb").read()

    def test_articles_without_negations_skipped(self, tmp_path, capsys):
        root = tmp_path / "articles"
        root.mkdir()
        (root / "clean.txt").write_text(
            "The mayor approved the budget. Analysts welcomed the move.",
            encoding="utf-8",
        )
        rng = random.Random(2)
        (root / "negok.txt").write_text(
            article_with_negations(rng, min_negations=3, min_words=60, max_words=100),
            encoding="utf-8",
        )
        out = str(tmp_path / "out.jsonl")
        code = cli.main(["modify", str(root), out, "--m", "4"])
        assert code == 0
        assert "skipping clean" in capsys.readouterr().err
        assert len(read_jsonl(out)) == 2

    def test_all_skipped_is_empty_input(self, tmp_path, capsys):
        root = tmp_path / "articles"
        root.mkdir()
        (root / "clean.txt").write_text("The mayor approved the budget.", encoding="utf-8")
        out = str(tmp_path / "out.jsonl")
        assert cli.main(["modify", str(root), out, "--m", "4"]) == 1
        assert not os.path.exists(out)

    def test_empty_directory_exit_1(self, tmp_path):
        root = tmp_path / "articles"
        root.mkdir()
        out = str(tmp_path / "out.jsonl")
        assert cli.main(["modify", str(root), out, "--m", "2"]) == 1

    def test_remote_scorer(self, articles_dir, tmp_path, mock_server, monkeypatch):
        def score(payload):
            return Outcome(body={"probs": [0.5] * len(payload["candidates"])})

        mock_server.set_default("/score", score)
        monkeypatch.setenv("VFORGE_SCORER_URL", mock_server.url)
        out = str(tmp_path / "out.jsonl")
        code = cli.main(
            ["modify", articles_dir, out, "--m", "2", "--scorer", "remote", "--jobs", "4"]
        )
        assert code == 0
        assert len(read_jsonl(out)) == 6

    def test_remote_scorer_failure_exit_2(self, articles_dir, tmp_path, mock_server, monkeypatch):
        mock_server.set_default("/score", Outcome(status=500, body={"error": "down"}))
        monkeypatch.setenv("VFORGE_SCORER_URL", mock_server.url)
        out = str(tmp_path / "out.jsonl")
        code = cli.main(["modify", articles_dir, out, "--m", "2", "--scorer", "remote"])
        assert code == 2

    def test_saved_model_option(self, articles_dir, tmp_path):
        from vforge.ngram import save_model, train_ngram
        from vforge.text import tokenize

        model = train_ngram([tokenize("No vote was held. The plan was not ready.")])
        model_path = str(tmp_path / "model.txt")
        save_model(model, model_path)
        out = str(tmp_path / "out.jsonl")
        code = cli.main(
            ["modify", articles_dir, out, "--m", "2", "--model", model_path]
        )
        assert code == 0


class TestExtendQa:
    def write_questions(self, tmp_path, stems):
        lines = [f"{stem}\tWhat did officials say about the plan?\tThey said little." for stem in stems]
        path = tmp_path / "questions.tsv"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return str(path)

    def test_emits_unlabeled_tasks(self, articles_dir, tmp_path, mock_server, monkeypatch):
        prompts = []

        def gen(payload):
            prompts.append(payload["prompt"])
            return Outcome(body={"text": "Officials said the plan was on track."})

        mock_server.set_default("/generate", gen)
        monkeypatch.setenv("VFORGE_GENERATOR_URL", mock_server.url)
        questions = self.write_questions(tmp_path, ["alpha", "beta", "gamma"])
        out = str(tmp_path / "tasks.jsonl")
        code = cli.main(
            ["extend", articles_dir, out, "--mode", "qa", "--questions", questions]
        )
        assert code == 0
        tasks = load_tasks_jsonl(out)
        assert len(tasks) == 3
        for task in tasks:
            assert task.kind == "veracity"
            assert task.answer == "Officials said the plan was on track."
            assert task.meta["answer_word_count"] == 7
            assert task.meta["gold_answer"] == "They said little."
            assert task.quota == 1
        for prompt in prompts:
            assert "\nWe attempt to answer: " in prompt
            assert prompt.endswith("\nAnswer:")
        # the output holds tasks, not labeled examples
        raw = [json.loads(line) for line in open(out, encoding="utf-8")]
        assert all("label" not in obj for obj in raw)

    def test_double_fraction_marks_quota(self, articles_dir, tmp_path, mock_server, monkeypatch):
        mock_server.set_default(
            "/generate", Outcome(body={"text": "Officials said the plan was on track."})
        )
        monkeypatch.setenv("VFORGE_GENERATOR_URL", mock_server.url)
        questions = self.write_questions(tmp_path, ["alpha", "beta", "gamma"])
        out = str(tmp_path / "tasks.jsonl")
        code = cli.main(
            [
                "extend", articles_dir, out, "--mode", "qa",
                "--questions", questions, "--double-fraction", "0.34",
            ]
        )
        assert code == 0
        tasks = load_tasks_jsonl(out)
        assert sum(1 for t in tasks if t.quota == 2) == 1

    def test_article_without_question_skipped(self, articles_dir, tmp_path, mock_server, monkeypatch, capsys):
        mock_server.set_default(
            "/generate", Outcome(body={"text": "Officials said the plan was on track."})
        )
        monkeypatch.setenv("VFORGE_GENERATOR_URL", mock_server.url)
        questions = self.write_questions(tmp_path, ["alpha"])
        out = str(tmp_path / "tasks.jsonl")
        code = cli.main(
            ["extend", articles_dir, out, "--mode", "qa", "--questions", questions]
        )
        assert code == 0
        assert len(load_tasks_jsonl(out)) == 1
        err = capsys.readouterr().err
        assert "skipping beta" in err and "skipping gamma" in err

    def test_generator_failure_exit_2(self, articles_dir, tmp_path, mock_server, monkeypatch):
        mock_server.set_default("/generate", Outcome(status=503, body={"error": "down"}))
        monkeypatch.setenv("VFORGE_GENERATOR_URL", mock_server.url)
        questions = self.write_questions(tmp_path, ["alpha", "beta", "gamma"])
        out = str(tmp_path / "tasks.jsonl")
        code = cli.main(
            ["extend", articles_dir, out, "--mode", "qa", "--questions", questions]
        )
        assert code == 2

    def test_missing_generator_env(self, articles_dir, tmp_path, monkeypatch):
        monkeypatch.delenv("VFORGE_GENERATOR_URL", raising=False)
        questions = self.write_questions(tmp_path, ["alpha"])
        out = str(tmp_path / "tasks.jsonl")
        code = cli.main(
            ["extend", articles_dir, out, "--mode", "qa", "--questions", questions]
        )
        assert code == 64


class TestExtendVanilla:
    def test_writes_length_matched_pairs(self, tmp_path, mock_server, monkeypatch):
        rng = random.Random(9)
        root = tmp_path / "articles"
        root.mkdir()
        for name in ("one", "two"):
            (root / f"{name}.txt").write_text(
                article(rng, min_words=80, max_words=90), encoding="utf-8"
            )
        mock_server.set_default(
            "/generate",
            Outcome(body={"text": "Machine text follows here now quickly today again."}),
        )
        monkeypatch.setenv("VFORGE_GENERATOR_URL", mock_server.url)
        out = str(tmp_path / "out.jsonl")
        code = cli.main(
            [
                "extend", str(root), out, "--mode", "vanilla",
                "--g", "0.1", "--prefix-words", "30",
            ]
        )
        assert code == 0
        ds = read_jsonl(out)
        assert len(ds) == 4
        by_id = {ex.id: ex for ex in ds}
        for stem in ("one", "two"):
            fake = by_id[f"{stem}-fake"]
            real = by_id[f"{stem}-real"]
            assert fake.meta["g_actual"] >= 0.1
            assert real.meta["g_actual"] == 0.0
            from vforge.text import tokenize

            assert tokenize(fake.text).n_words == tokenize(real.text).n_words

    def test_short_articles_skipped_exit_0_if_any_succeed(self, tmp_path, mock_server, monkeypatch, capsys):
        rng = random.Random(9)
        root = tmp_path / "articles"
        root.mkdir()
        (root / "long.txt").write_text(article(rng, min_words=80, max_words=90), encoding="utf-8")
        (root / "tiny.txt").write_text("Too short to extend.", encoding="utf-8")
        mock_server.set_default(
            "/generate",
            Outcome(body={"text": "Machine text follows here now quickly today again."}),
        )
        monkeypatch.setenv("VFORGE_GENERATOR_URL", mock_server.url)
        out = str(tmp_path / "out.jsonl")
        code = cli.main(
            [
                "extend", str(root), out, "--mode", "vanilla",
                "--g", "0.1", "--prefix-words", "30",
            ]
        )
        assert code == 0
        assert "skipping tiny" in capsys.readouterr().err
        assert len(read_jsonl(out)) == 2

    def test_all_short_exit_1(self, tmp_path, mock_server, monkeypatch):
        root = tmp_path / "articles"
        root.mkdir()
        (root / "tiny.txt").write_text("Too short to extend.", encoding="utf-8")
        mock_server.set_default(
            "/generate", Outcome(body={"text": "Machine text follows here."})
        )
        monkeypatch.setenv("VFORGE_GENERATOR_URL", mock_server.url)
        out = str(tmp_path / "out.jsonl")
        code = cli.main(
            ["extend", str(root), out, "--mode", "vanilla", "--prefix-words", "30"]
        )
        assert code == 1


class TestEval:
    def test_length_baseline_report_files(self, tmp_path, capsys):
        ds_path = qa_dataset(tmp_path)
        report_path = str(tmp_path / "report.json")
        code = cli.main(
            ["eval", ds_path, "--detector", "length-baseline", "--report", report_path]
        )
        assert code == 0
        body = json.load(open(report_path, encoding="utf-8"))
        assert body["detector"] == "length-baseline"
        assert body["n_eval"] == 6
        assert body["fake_recall"] == 1.0
        table = open(str(tmp_path / "report.txt"), encoding="utf-8").read()
        assert "length-baseline" in table
        assert os.path.exists(str(tmp_path / "report_confusion.png"))
        roc_lines = open(str(tmp_path / "report_roc.csv"), encoding="utf-8").read().splitlines()
        assert roc_lines[0] == "fpr,tpr"
        assert "length-baseline" in capsys.readouterr().out

    def test_majority_baseline(self, tmp_path):
        ds_path = qa_dataset(tmp_path)
        report_path = str(tmp_path / "report.json")
        code = cli.main(
            ["eval", ds_path, "--detector", "majority", "--report", report_path]
        )
        assert code == 0
        body = json.load(open(report_path, encoding="utf-8"))
        # tie on 10/10 training labels resolves to predicting real
        assert body["fake_recall"] in (0.0, 1.0)
        assert not os.path.exists(str(tmp_path / "report_roc.csv"))

    def test_remote_detector(self, tmp_path, mock_server, monkeypatch):
        ds_path = qa_dataset(tmp_path)

        def predict(payload):
            return Outcome(body={"label": "fake", "score": 0.75})

        mock_server.set_default("/predict", predict)
        monkeypatch.setenv("VFORGE_DETECTOR_URL", mock_server.url)
        report_path = str(tmp_path / "report.json")
        code = cli.main(
            ["eval", ds_path, "--detector", "remote", "--report", report_path, "--jobs", "4"]
        )
        assert code == 0
        body = json.load(open(report_path, encoding="utf-8"))
        assert body["fake_recall"] == 1.0
        assert body["real_recall"] == 0.0
        assert os.path.exists(str(tmp_path / "report_roc.csv"))
        assert os.path.exists(str(tmp_path / "report_roc.png"))

    def test_remote_detector_failure_exit_2(self, tmp_path, mock_server, monkeypatch):
        ds_path = qa_dataset(tmp_path)
        mock_server.set_default("/predict", Outcome(status=500, body={}))
        monkeypatch.setenv("VFORGE_DETECTOR_URL", mock_server.url)
        code = cli.main(
            ["eval", ds_path, "--detector", "remote", "--report", str(tmp_path / "r.json")]
        )
        assert code == 2

    def test_fraction_curve_written_for_vanilla(self, tmp_path):
        rng = random.Random(4)
        examples = []
        for i in range(20):
            label = "fake" if i % 2 == 0 else "real"
            frac = rng.uniform(0.05, 0.95) if label == "fake" else 0.0
            examples.append(
                LabeledExample(
                    id=f"v{i:03d}",
                    text=" ".join(["word"] * rng.randint(20, 40)) + ".",
                    label=label,
                    scenario="vanilla_extension",
                    meta={"g_actual": frac},
                )
            )
        ds_path = str(tmp_path / "v.jsonl")
        write_jsonl(Dataset(examples=tuple(examples)), ds_path)
        report_path = str(tmp_path / "report.json")
        code = cli.main(
            ["eval", ds_path, "--detector", "majority", "--report", report_path]
        )
        assert code == 0
        lines = open(str(tmp_path / "report_fractions.csv"), encoding="utf-8").read().splitlines()
        assert lines[0] == "bin_low,bin_high,real_rate,n"
        assert os.path.exists(str(tmp_path / "report_fractions.png"))

    def test_missing_dataset_exit_1(self, tmp_path):
        code = cli.main(
            ["eval", str(tmp_path / "absent.jsonl"), "--report", str(tmp_path / "r.json")]
        )
        assert code == 1


class TestServe:
    def test_bad_tasks_file_exit_1_with_line(self, tmp_path, capsys):
        tasks = tmp_path / "tasks.jsonl"
        tasks.write_text('{"task_id": "t1"}\n', encoding="utf-8")
        code = cli.main(["serve", "--tasks", str(tasks)])
        assert code == 1
        assert "line 1" in capsys.readouterr().err

    def test_bind_failure_exit_2(self, tmp_path):
        from .test_server import veracity_task
        from vforge.annotation import write_tasks_jsonl

        tasks_path = str(tmp_path / "tasks.jsonl")
        write_tasks_jsonl([veracity_task("t1")], tasks_path)
        blocker = socket.socket()
        blocker.bind(("127.0.0.1", 0))
        blocker.listen(1)
        port = blocker.getsockname()[1]
        try:
            code = cli.main(
                [
                    "serve", "--tasks", tasks_path, "--port", str(port),
                    "--journal", str(tmp_path / "labels.jsonl"),
                ]
            )
            assert code == 2
        finally:
            blocker.close()

    def test_serves_requests_subprocess(self, tmp_path):
        from .test_server import veracity_task
        from vforge.annotation import write_tasks_jsonl

        tasks_path = str(tmp_path / "tasks.jsonl")
        write_tasks_jsonl([veracity_task("t1"), veracity_task("t2")], tasks_path)
        proc = subprocess.Popen(
            [
                sys.executable, "-u", "-m", "vforge.cli",
                "serve", "--tasks", tasks_path, "--port", "0",
            ],
            cwd=str(tmp_path),
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
        )
        try:
            banner = proc.stdout.readline()
            assert "serving 2 tasks" in banner
            port = int(banner.rsplit(":", 1)[1])
            with urllib.request.urlopen(
                f"http://127.0.0.1:{port}/api/stats", timeout=5
            ) as resp:
                stats = json.loads(resp.read())
            assert stats["tasks_total"] == 2
            payload = json.dumps(
                {"task_id": "t1", "annotator_id": "cli-test", "verdict": "true"}
            ).encode("utf-8")
            req = urllib.request.Request(
                f"http://127.0.0.1:{port}/api/labels", data=payload, method="POST"
            )
            with urllib.request.urlopen(req, timeout=5) as resp:
                assert resp.status == 200
            assert os.path.exists(str(tmp_path / "labels.jsonl"))
        finally:
            proc.terminate()
            proc.wait(timeout=10)
