"""End-to-end command-line behavior and exit codes."""

import json
from pathlib import Path

import pytest

from rpmkit import rpm
from rpmkit.cli import main


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestGenerate:
    def test_count_zero_writes_empty_valid_file(self, tmp_path, capsys):
        out = tmp_path / "empty.jsonl"
        code, stdout, _ = _run(capsys, "generate", "--count", "0", "--out", str(out))
        assert code == 0
        assert out.read_text() == ""
        assert rpm.load_corpus(out) == []

    def test_same_seed_identical_files(self, tmp_path, capsys):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        for path in (a, b):
            code, _, _ = _run(capsys, "generate", "--count", "100", "--seed", "12345",
                              "--out", str(path))
            assert code == 0
        assert a.read_bytes() == b.read_bytes()

    def test_config_echo_and_summary(self, tmp_path, capsys):
        out = tmp_path / "c.jsonl"
        code, stdout, _ = _run(capsys, "generate", "--count", "20", "--out", str(out))
        assert code == 0
        assert stdout.startswith("config[generate]:")
        assert "rule signatures" in stdout

    def test_raster_flag(self, tmp_path, capsys):
        out = tmp_path / "r.jsonl"
        code, _, _ = _run(capsys, "generate", "--count", "2", "--out", str(out),
                          "--raster", "16x16", "--config", "grid2")
        assert code == 0
        assert rpm.load_corpus(out)[0].context[0].raster.shape == (16, 16)


class TestEval:
    def test_validate_only_passes_generated_file(self, tmp_path, capsys):
        out = tmp_path / "v.jsonl"
        _run(capsys, "generate", "--count", "50", "--out", str(out), "--config", "grid3")
        code, stdout, _ = _run(capsys, "eval", "--data", str(out), "--validate-only")
        assert code == 0
        assert "50 ok, 0 invalid" in stdout

    def test_validate_only_flags_corruption(self, tmp_path, capsys):
        out = tmp_path / "v.jsonl"
        _run(capsys, "generate", "--count", "5", "--out", str(out))
        problems = rpm.load_corpus(out)
        problems[2].answer = (problems[2].answer + 1) % 8
        rpm.save_corpus(problems, out)
        code, stdout, _ = _run(capsys, "eval", "--data", str(out), "--validate-only")
        assert code == 2
        assert "INVALID" in stdout

    def test_missing_ckpt_is_usage_error(self, tmp_path, capsys):
        out = tmp_path / "v.jsonl"
        _run(capsys, "generate", "--count", "2", "--out", str(out))
        code, _, err = _run(capsys, "eval", "--data", str(out))
        assert code == 1

    def test_missing_data_file_is_data_error(self, capsys):
        code, _, err = _run(capsys, "eval", "--data", "/nonexistent.jsonl", "--validate-only")
        assert code == 2


class TestTrain:
    def test_zero_epochs_reports_chance(self, tmp_path, capsys):
        data = tmp_path / "d.jsonl"
        _run(capsys, "generate", "--count", "120", "--out", str(data))
        run_dir = tmp_path / "run"
        code, stdout, _ = _run(
            capsys, "train", "--data", str(data), "--epochs", "0", "--out", str(run_dir),
        )
        assert code == 0
        manifest = json.loads((run_dir / "manifest.json").read_text())
        assert manifest["best_epoch"] == -1
        assert 0.0 <= manifest["test_accuracy"] <= 0.5

    def test_preset_subsample_controls_train_size(self, tmp_path, capsys):
        data = tmp_path / "d.jsonl"
        _run(capsys, "generate", "--count", "100", "--out", str(data))
        run_dir = tmp_path / "run"
        code, _, _ = _run(
            capsys, "train", "--data", str(data), "--epochs", "0",
            "--preset-subsample", "14", "--out", str(run_dir),
        )
        assert code == 0
        manifest = json.loads((run_dir / "manifest.json").read_text())
        assert manifest["corpus_sizes"]["train"] == 14
        assert len(rpm.load_corpus(run_dir / "train.jsonl")) == 14

    def test_cross_shapes_recorded_in_manifest(self, tmp_path, capsys):
        data = tmp_path / "d.jsonl"
        mixed = rpm.generate_corpus("center", 150, seed=12345) + rpm.generate_corpus(
            "center", 80, seed=54321, domain=rpm.AttributeDomain(shape_types=(2, 4))
        )
        rpm.save_corpus(mixed, data)
        run_dir = tmp_path / "run"
        code, _, _ = _run(
            capsys, "train", "--data", str(data), "--epochs", "0", "--cross-shapes",
            "--out", str(run_dir),
        )
        assert code == 0
        manifest = json.loads((run_dir / "manifest.json").read_text())
        report = manifest["split_report"]
        assert report["train_shapes"] == [0, 1, 3]
        assert report["eval_shapes"] == [2, 4]

    def test_eval_matches_manifest_test_accuracy(self, tmp_path, capsys):
        data = tmp_path / "d.jsonl"
        _run(capsys, "generate", "--count", "150", "--out", str(data))
        run_dir = tmp_path / "run"
        code, _, _ = _run(
            capsys, "train", "--data", str(data), "--epochs", "1", "--out", str(run_dir),
            "--config-file", str(_mini_model_config(tmp_path)),
        )
        assert code == 0
        manifest = json.loads((run_dir / "manifest.json").read_text())
        code, stdout, _ = _run(
            capsys, "eval", "--ckpt", str(run_dir / "best.ckpt.json"),
            "--data", str(run_dir / "test.jsonl"),
        )
        assert code == 0
        reported = float(stdout.strip().splitlines()[-1].split()[1])
        assert reported == manifest["test_accuracy"]

    def test_config_file_flag_precedence(self, tmp_path, capsys):
        data = tmp_path / "d.jsonl"
        _run(capsys, "generate", "--count", "80", "--out", str(data))
        cfg_file = tmp_path / "cfg.json"
        cfg_file.write_text(json.dumps({"epochs": 3, "lr": 0.5, "embed_dim": 8, "latent_dim": 8}))
        run_dir = tmp_path / "run"
        code, stdout, _ = _run(
            capsys, "train", "--data", str(data), "--epochs", "0",
            "--config-file", str(cfg_file), "--out", str(run_dir),
        )
        assert code == 0
        manifest = json.loads((run_dir / "manifest.json").read_text())
        assert manifest["run_config"]["epochs"] == 0  # flag wins
        assert manifest["run_config"]["lr"] == 0.5  # file fills the rest


def _mini_model_config(tmp_path) -> Path:
    path = tmp_path / "mini.json"
    path.write_text(json.dumps({"embed_dim": 16, "latent_dim": 8}))
    return path


class TestSplit:
    def test_subsample_split(self, tmp_path, capsys):
        data = tmp_path / "d.jsonl"
        _run(capsys, "generate", "--count", "90", "--out", str(data))
        out_dir = tmp_path / "split"
        code, stdout, _ = _run(
            capsys, "split", "--data", str(data), "--out", str(out_dir),
            "--preset-subsample", "35",
        )
        assert code == 0
        assert len(rpm.load_corpus(out_dir / "subsample.jsonl")) == 35
        report = json.loads((out_dir / "split_report.json").read_text())
        assert report["n_subsample"] == 35

    def test_cross_shape_split_files(self, tmp_path, capsys):
        data = tmp_path / "d.jsonl"
        mixed = rpm.generate_corpus("center", 150, seed=1) + rpm.generate_corpus(
            "center", 60, seed=2, domain=rpm.AttributeDomain(shape_types=(2, 4))
        )
        rpm.save_corpus(mixed, data)
        out_dir = tmp_path / "split"
        code, _, _ = _run(capsys, "split", "--data", str(data), "--out", str(out_dir),
                          "--cross-shapes")
        assert code == 0
        assert (out_dir / "train.jsonl").exists() and (out_dir / "eval.jsonl").exists()

    def test_no_strategy_is_usage_error(self, tmp_path, capsys):
        data = tmp_path / "d.jsonl"
        _run(capsys, "generate", "--count", "5", "--out", str(data))
        code, _, _ = _run(capsys, "split", "--data", str(data), "--out", str(tmp_path / "s"))
        assert code == 1


class TestReport:
    def test_two_runs_give_two_rows(self, tmp_path, capsys):
        data = tmp_path / "d.jsonl"
        _run(capsys, "generate", "--count", "100", "--out", str(data))
        dirs = []
        for preset in ("14", "35"):
            run_dir = tmp_path / f"run{preset}"
            _run(capsys, "train", "--data", str(data), "--epochs", "0",
                 "--preset-subsample", preset, "--out", str(run_dir))
            dirs.append(run_dir)
        csv_path = tmp_path / "summary.csv"
        code, stdout, _ = _run(
            capsys, "report", "--run", str(dirs[0]), "--run", str(dirs[1]),
            "--csv", str(csv_path),
        )
        assert code == 0
        data_rows = [l for l in stdout.splitlines() if l.startswith(str(tmp_path))]
        assert len(data_rows) == 2
        assert "mode x training-set size" in stdout  # two sizes -> pivot grid
        assert len(csv_path.read_text().strip().splitlines()) == 3


class TestUsage:
    def test_unknown_flag_exits_one(self, capsys):
        code, _, err = _run(capsys, "generate", "--count", "1", "--out", "/tmp/x.jsonl",
                            "--frobnicate")
        assert code == 1

    def test_unknown_verb_exits_one(self, capsys):
        code, _, _ = _run(capsys, "conjure")
        assert code == 1

    def test_every_command_echoes_config(self, tmp_path, capsys):
        out = tmp_path / "e.jsonl"
        code, stdout, _ = _run(capsys, "generate", "--count", "1", "--out", str(out))
        assert code == 0 and stdout.startswith("config[generate]:")
        code, stdout, _ = _run(capsys, "eval", "--data", str(out), "--validate-only")
        assert code == 0 and "config[eval]:" in stdout
