import hashlib
import json

import pytest

from helpers import planted_corpus, write_corpus
from tweetspam.cli import RunConfig, run, validate_config


@pytest.fixture
def corpus_file(tmp_path):
    path = tmp_path / "corpus.jsonl"
    write_corpus(path, planted_corpus(n_ham=80, n_spam=40, seed=31))
    return path


def _run(argv, capsys):
    code = run([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured


class TestValidateConfig:
    def test_bad_ngram_order_named(self):
        config = RunConfig(command="cv", corpus="c", report="r",
                           features="ngram:quad:tf")
        errors = validate_config(config)
        assert any("quad" in e for e in errors)

    def test_k_bound(self):
        config = RunConfig(command="cv", corpus="c", report="r", k=1)
        assert any("k must be >= 2" in e for e in validate_config(config))

    def test_valid_config_empty_error_list(self):
        config = RunConfig(command="cv", corpus="c", report="r")
        assert validate_config(config) == []

    def test_collects_multiple_errors(self):
        config = RunConfig(command="cv", features="nope", classifier="bogus", k=0)
        errors = validate_config(config)
        assert len(errors) >= 4  # missing paths + features + classifier + k


class TestCvCommand:
    def test_cv_writes_report(self, corpus_file, tmp_path, capsys):
        report_path = tmp_path / "report.json"
        code, captured = _run(
            ["cv", "--corpus", corpus_file, "--features", "user",
             "--classifier", "rf", "--params", '{"n_trees": 5}',
             "--k", "10", "--seed", "42", "--report", report_path],
            capsys,
        )
        assert code == 0
        assert "config:" in captured.err  # resolved config echoed with seed
        assert '"seed":42' in captured.err
        document = json.loads(report_path.read_text())
        assert set(document) == {"config", "seed", "folds", "mean", "std", "timings"}
        assert len(document["folds"]) == 10
        assert document["timings"] is None

    def test_cv_byte_identical_reruns(self, corpus_file, tmp_path, capsys):
        args = ["cv", "--corpus", corpus_file, "--features", "user,ngram:uni+bi:tf",
                "--classifier", "rf", "--params", '{"n_trees": 5}', "--min-df", "1",
                "--k", "5", "--seed", "7"]
        first = tmp_path / "r1.json"
        second = tmp_path / "r2.json"
        assert _run(args + ["--report", first], capsys)[0] == 0
        assert _run(args + ["--report", second], capsys)[0] == 0
        assert first.read_bytes() == second.read_bytes()

    def test_cv_does_not_mutate_input(self, corpus_file, tmp_path, capsys):
        before = hashlib.sha256(corpus_file.read_bytes()).hexdigest()
        _run(["cv", "--corpus", corpus_file, "--features", "user",
              "--classifier", "tree", "--k", "3", "--report", tmp_path / "r.json"],
             capsys)
        assert hashlib.sha256(corpus_file.read_bytes()).hexdigest() == before


class TestTrainPredict:
    def test_train_then_predict(self, corpus_file, tmp_path, capsys):
        model_path = tmp_path / "model.json"
        code, _ = _run(
            ["train", "--corpus", corpus_file, "--model", model_path,
             "--features", "ngram:uni+bi:tf,user", "--min-df", "1",
             "--classifier", "rf", "--params", '{"n_trees": 5}'],
            capsys,
        )
        assert code == 0
        output = tmp_path / "predictions.jsonl"
        code, _ = _run(
            ["predict", "--model", model_path, "--input", corpus_file,
             "--output", output],
            capsys,
        )
        assert code == 0
        lines = output.read_text().strip().splitlines()
        assert len(lines) == len(corpus_file.read_text().strip().splitlines())
        for line in lines:
            obj = json.loads(line)
            assert set(obj) == {"tweet_id", "label", "score"}
            assert obj["label"] in ("spam", "ham")
            assert 0.0 <= obj["score"] <= 1.0

    def test_train_byte_identical_reruns(self, corpus_file, tmp_path, capsys):
        args = ["train", "--corpus", corpus_file, "--features", "user",
                "--classifier", "rf", "--params", '{"n_trees": 4}', "--seed", "9"]
        first = tmp_path / "m1.json"
        second = tmp_path / "m2.json"
        assert _run(args + ["--model", first], capsys)[0] == 0
        assert _run(args + ["--model", second], capsys)[0] == 0
        assert first.read_bytes() == second.read_bytes()

    def test_predict_with_corrupted_model_exits_2(self, corpus_file, tmp_path, capsys):
        model_path = tmp_path / "model.json"
        _run(["train", "--corpus", corpus_file, "--model", model_path,
              "--features", "user", "--classifier", "tree"], capsys)
        data = bytearray(model_path.read_bytes())
        target = data.find(b'"parameters"')
        while not chr(data[target]).isdigit():
            target += 1
        data[target] = ord(str((int(chr(data[target])) + 1) % 10))
        model_path.write_bytes(bytes(data))
        code, captured = _run(
            ["predict", "--model", model_path, "--input", corpus_file,
             "--output", tmp_path / "p.jsonl"],
            capsys,
        )
        assert code == 2
        assert "checksum" in captured.err


class TestIngest:
    def test_ingest_samples_one_per_user(self, tmp_path, capsys):
        corpus = planted_corpus(n_ham=20, n_spam=10, seed=8)
        # duplicate every record under the same user with a new tweet id
        doubled = []
        for record in corpus.records:
            doubled.append(record)
            doubled.append(
                type(record)(
                    tweet_id=record.tweet_id + "-b",
                    user_id=record.user_id,
                    text=record.text + " again",
                    created_at=record.created_at,
                    label=record.label,
                    user=record.user,
                )
            )
        raw = tmp_path / "raw.jsonl"
        from tweetspam.corpus import LabeledCorpus

        write_corpus(raw, LabeledCorpus(records=tuple(doubled)))
        out = tmp_path / "clean.jsonl"
        code, captured = _run(
            ["ingest", "--input", raw, "--output", out,
             "--sample-one-per-user", "--seed", "3"],
            capsys,
        )
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 30
        users = [json.loads(line)["user_id"] for line in lines]
        assert len(set(users)) == 30

    def test_ingest_lenient_counts_skips(self, tmp_path, capsys):
        corpus = planted_corpus(n_ham=5, n_spam=5, seed=9)
        raw = tmp_path / "raw.jsonl"
        write_corpus(raw, corpus)
        with open(raw, "a", encoding="utf-8") as handle:
            handle.write("{broken\n")
        out = tmp_path / "clean.jsonl"
        code, captured = _run(
            ["ingest", "--input", raw, "--output", out, "--lenient"], capsys
        )
        assert code == 0
        assert "skipped 1" in captured.err


class TestGridsearchCommand:
    def test_gridsearch_writes_report(self, corpus_file, tmp_path, capsys):
        grid_path = tmp_path / "grid.json"
        grid_path.write_text('{"max_depth": [2, 4]}')
        report_path = tmp_path / "grid_report.json"
        code, _ = _run(
            ["gridsearch", "--corpus", corpus_file, "--grid", grid_path,
             "--classifier", "tree", "--features", "user",
             "--tune-fraction", "0.5", "--k", "2", "--report", report_path],
            capsys,
        )
        assert code == 0
        document = json.loads(report_path.read_text())
        assert {"grid", "final"} == set(document)
        assert len(document["grid"]["points"]) == 2
        assert document["final"] is not None  # final CV on the remainder
        assert document["grid"]["tuning_subset"]["indices"]

    def test_gridsearch_no_final(self, corpus_file, tmp_path, capsys):
        grid_path = tmp_path / "grid.json"
        grid_path.write_text('{"max_depth": [2]}')
        report_path = tmp_path / "g.json"
        code, _ = _run(
            ["gridsearch", "--corpus", corpus_file, "--grid", grid_path,
             "--classifier", "tree", "--features", "user", "--k", "2",
             "--no-final-cv", "--report", report_path],
            capsys,
        )
        assert code == 0
        assert json.loads(report_path.read_text())["final"] is None


class TestBenchCommand:
    def test_bench_writes_report(self, corpus_file, tmp_path, capsys):
        report_path = tmp_path / "bench.json"
        code, captured = _run(
            ["bench", "--corpus", corpus_file, "--repetitions", "1",
             "--report", report_path],
            capsys,
        )
        assert code == 0
        document = json.loads(report_path.read_text())
        assert document["padded"] is True
        assert "user_features" in document["seconds_per_1000"]
        assert "bench user_features" in captured.err


class TestErrorPaths:
    def test_unknown_flag_exits_1(self, capsys):
        code, captured = _run(["cv", "--corpus", "x", "--report", "y",
                               "--frobnicate"], capsys)
        assert code == 1
        assert "error:" in captured.err

    def test_unknown_command_exits_1(self, capsys):
        assert _run(["transmogrify"], capsys)[0] == 1

    def test_missing_corpus_file_exits_2(self, tmp_path, capsys):
        code, captured = _run(
            ["cv", "--corpus", tmp_path / "absent.jsonl", "--features", "user",
             "--classifier", "tree", "--report", tmp_path / "r.json"],
            capsys,
        )
        assert code == 2

    def test_invalid_feature_string_exits_1(self, corpus_file, tmp_path, capsys):
        code, captured = _run(
            ["cv", "--corpus", corpus_file, "--features", "ngram:quad:tf",
             "--classifier", "tree", "--report", tmp_path / "r.json"],
            capsys,
        )
        assert code == 1
        assert "quad" in captured.err

    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            run(["--version"])
        assert excinfo.value.code == 0
        assert "tweetspam" in capsys.readouterr().out
