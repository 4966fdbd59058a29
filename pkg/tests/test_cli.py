import csv
import json
import signal
import subprocess
import sys
import time
import urllib.request

import pytest

from sidr.cli import main
from sidr.corpus import load_corpus


@pytest.fixture
def synth_corpus_path(tmp_path):
    path = tmp_path / "synth.jsonl"
    code = main(
        [
            "make-data", "--kind", "synth", "--k", "3", "--n-per", "10",
            "--dim", "16", "--spread", "0.1", "--seed", "3", "--out", str(path),
        ]
    )
    assert code == 0
    return path


class TestMakeData:
    def test_synth_writes_valid_jsonl(self, synth_corpus_path):
        corpus = load_corpus(synth_corpus_path, fmt="jsonl")
        assert len(corpus) == 30
        assert corpus.label_count == 3

    def test_tfidf_on_bundled_corpus(self, tmp_path):
        out = tmp_path / "vec.jsonl"
        code = main(
            ["make-data", "--kind", "tfidf", "--input", "notes3",
             "--target-dim", "16", "--out", str(out)]
        )
        assert code == 0
        corpus = load_corpus(out, fmt="jsonl")
        assert corpus.dim == 16 and len(corpus) == 201

    def test_tfidf_requires_input(self, tmp_path):
        assert main(["make-data", "--kind", "tfidf", "--out", str(tmp_path / "x.jsonl")]) == 2


class TestSimulate:
    def test_writes_curve_csv(self, synth_corpus_path, tmp_path, capsys):
        out = tmp_path / "curve.csv"
        code = main(
            ["simulate", "--corpus", str(synth_corpus_path), "--pipeline", "neuralsi",
             "--iterations", "10", "--seed", "4", "--epochs", "5", "--out", str(out)]
        )
        assert code == 0
        header = json.loads(capsys.readouterr().out.splitlines()[0])
        assert header["command"] == "simulate" and header["seed"] == 4
        with open(out) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["iteration", "accuracy"]
        assert len(rows) == 12  # header + 11 accuracies

    def test_same_seed_identical_bytes(self, synth_corpus_path, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["simulate", "--corpus", str(synth_corpus_path), "--pipeline", "deepsi",
                "--iterations", "3", "--seed", "5", "--epochs", "5"]
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_missing_corpus_exits_2(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["simulate", "--corpus", str(tmp_path / "ghost.jsonl"),
                  "--pipeline", "deepsi", "--out", str(tmp_path / "o.csv")])
        assert exc.value.code == 2

    def test_unknown_flag_rejected(self, synth_corpus_path, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["simulate", "--corpus", str(synth_corpus_path), "--pipeline", "deepsi",
                  "--out", str(tmp_path / "o.csv"), "--bogus", "1"])
        assert exc.value.code == 2


class TestBench:
    def test_writes_table_and_stage_json(self, tmp_path, capsys):
        out = tmp_path / "bench.csv"
        code = main(
            ["bench", "--sizes", "100,200", "--repeats", "2",
             "--pipelines", "deepsi,neuralsi", "--epochs", "10",
             "--mds-iters", "30", "--out", str(out)]
        )
        assert code == 0
        printed = capsys.readouterr().out
        assert "exponent" in printed
        with open(out) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["pipeline", "n", "mean_s", "std_s", "repeats"]
        assert len(rows) == 5  # header + 2 pipelines x 2 sizes
        stages = json.loads(out.with_suffix(".stages.json").read_text())
        assert "deepsi/200" in stages and "mds" in stages["deepsi/200"]

    def test_invalid_size_rejected(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["bench", "--sizes", "0,100", "--out", str(tmp_path / "b.csv")])
        assert exc.value.code == 2


class TestProject:
    def test_layout_csv_rows(self, synth_corpus_path, tmp_path):
        out = tmp_path / "layout.csv"
        code = main(
            ["project", "--corpus", str(synth_corpus_path), "--pipeline", "deepsi",
             "--out", str(out)]
        )
        assert code == 0
        with open(out) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["id", "x", "y", "label"]
        assert len(rows) == 31
        for row in rows[1:]:
            assert -1.0 <= float(row[1]) <= 1.0
            assert -1.0 <= float(row[2]) <= 1.0


class TestServe:
    def test_serve_lists_bundled_corpora(self, tmp_path):
        port = 8765
        proc = subprocess.Popen(
            [sys.executable, "-m", "sidr.cli", "serve", "--port", str(port)],
            stdout=subprocess.PIPE,
            stderr=subprocess.STDOUT,
        )
        try:
            deadline = time.time() + 60
            body = None
            while time.time() < deadline:
                try:
                    with urllib.request.urlopen(f"http://127.0.0.1:{port}/corpora", timeout=2) as resp:
                        assert resp.status == 200
                        body = json.loads(resp.read())
                        break
                except (ConnectionError, OSError):
                    time.sleep(0.3)
            assert body is not None, "service never came up"
            names = {c["corpus_id"] for c in body}
            assert {"articles4", "notes3"} <= names
        finally:
            proc.send_signal(signal.SIGTERM)
            try:
                proc.wait(timeout=10)
            except subprocess.TimeoutExpired:
                proc.kill()
