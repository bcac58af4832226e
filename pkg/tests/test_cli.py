"""Command-line interface: every subcommand end to end."""

import csv
import json

import numpy as np
import pytest

from hashloop import __version__
from hashloop.cli import main
from hashloop.datasets import load_ground_truth, read_dataset
from hashloop.kernels import default_backend, set_backend


@pytest.fixture(autouse=True)
def restore_backend():
    yield
    set_backend(default_backend())


@pytest.fixture()
def synth_files(tmp_path):
    data = tmp_path / "frames.bin"
    gt = tmp_path / "gt.txt"
    code = main(["synth", "--out", str(data), "--gt-out", str(gt),
                 "--images", "40", "--features", "30",
                 "--loop", "25:5", "--loop", "26:6",
                 "--seed", "11"])
    assert code == 0
    return data, gt


class TestSynth:
    def test_outputs_parse(self, synth_files):
        data, gt_path = synth_files
        dataset = read_dataset(data)
        assert dataset.n_images == 40
        assert dataset.feature_counts == [30] * 40
        gt = load_ground_truth(gt_path, dataset.n_images)
        assert gt.pairs == frozenset({(25, 5), (26, 6)})

    def test_deterministic(self, tmp_path):
        paths = []
        for name in ("a.bin", "b.bin"):
            out = tmp_path / name
            main(["synth", "--out", str(out), "--images", "5",
                  "--features", "4", "--seed", "3"])
            paths.append(out.read_bytes())
        assert paths[0] == paths[1]

    def test_comma_separated_loops(self, tmp_path, capsys):
        out = tmp_path / "c.bin"
        gt = tmp_path / "c.txt"
        main(["synth", "--out", str(out), "--gt-out", str(gt),
              "--images", "30", "--features", "10",
              "--loop", "20:3,21:4", "--seed", "2"])
        assert load_ground_truth(gt).pairs == frozenset({(20, 3), (21, 4)})


class TestRun:
    def test_run_with_ground_truth(self, synth_files, tmp_path, capsys):
        data, gt = synth_files
        out = tmp_path / "run"
        code = main(["run", str(data), "--out", str(out),
                     "--gt", str(gt)])
        assert code == 0
        text = capsys.readouterr().out
        assert "processed 40 images" in text
        assert "precision" in text

        payload = json.loads((out / "report.json").read_text())
        assert payload["metrics"]["recall"] == 1.0
        assert (out / "similarity_matrix.csv").exists()
        assert (out / "detection_matrix.csv").exists()
        assert (out / "config.json").exists()

    def test_no_matrices(self, synth_files, tmp_path):
        data, _ = synth_files
        out = tmp_path / "run"
        main(["run", str(data), "--out", str(out), "--no-matrices"])
        assert not (out / "similarity_matrix.csv").exists()
        assert (out / "report.json").exists()

    def test_flag_overrides_config_file(self, synth_files, tmp_path):
        data, _ = synth_files
        config_file = tmp_path / "config.json"
        config_file.write_text(json.dumps({
            "exclusion_window": 5,
            "bayes": {"detection_threshold": 0.5},
        }))
        out = tmp_path / "run"
        main(["run", str(data), "--out", str(out),
              "--config", str(config_file), "--threshold", "0.8"])
        saved = json.loads((out / "config.json").read_text())
        assert saved["exclusion_window"] == 5          # from file
        assert saved["bayes"]["detection_threshold"] == 0.8  # flag wins

    def test_exact_and_backend_flags(self, synth_files, tmp_path):
        data, _ = synth_files
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        main(["run", str(data), "--out", str(out_a), "--exact",
              "--backend", "numpy"])
        main(["run", str(data), "--out", str(out_b)])
        sim_a = np.loadtxt(out_a / "similarity_matrix.csv", delimiter=",")
        sim_b = np.loadtxt(out_b / "similarity_matrix.csv", delimiter=",")
        # exact scoring never misses collisions, so it dominates
        assert np.all(sim_a >= sim_b - 1e-12)

    def test_missing_dataset_errors(self, tmp_path, capsys):
        code = main(["run", str(tmp_path / "nope.bin"),
                     "--out", str(tmp_path / "o")])
        assert code != 0
        assert "error" in capsys.readouterr().err.lower()


class TestAnalyze:
    def test_writes_curves(self, tmp_path):
        out = tmp_path / "analysis"
        code = main(["analyze", "--out", str(out),
                     "--substring-counts", "8,16", "--d-max", "64"])
        assert code == 0
        with open(out / "recall_curve.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["m", "d", "p_recall"]
        assert len(rows) == 1 + 2 * 65
        with open(out / "tradeoff.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["m", "R", "E"]
        assert [r[0] for r in rows[1:]] == ["8", "16"]


class TestGtConvert:
    def test_matrix_to_pairs(self, tmp_path):
        matrix = tmp_path / "m.csv"
        matrix.write_text("0,0,0\n0,0,0\n1,0,0\n")
        out = tmp_path / "gt.txt"
        code = main(["gt-convert", str(matrix), "--out", str(out)])
        assert code == 0
        assert load_ground_truth(out).pairs == frozenset({(2, 0)})

    def test_range_validation(self, tmp_path, capsys):
        matrix = tmp_path / "m.csv"
        matrix.write_text("0,0\n1,0\n")
        out = tmp_path / "gt.txt"
        code = main(["gt-convert", str(matrix), "--out", str(out),
                     "--images", "1"])
        assert code != 0


class TestBench:
    def test_json_output(self, tmp_path, capsys):
        out = tmp_path / "bench.json"
        code = main(["bench", "--images", "25", "--features", "40",
                     "--brute-frames", "2", "--json", str(out)])
        assert code == 0
        payload = json.loads(out.read_text())
        assert "numpy" in payload["backends"]
        for stats in payload["backends"].values():
            assert stats["mean_ms"] > 0
            assert stats["distances"] > 0
        assert payload["brute"]["mean_ms"] > 0
        assert payload["brute"]["n_frames"] == 2


class TestTopLevel:
    def test_version(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0
        assert __version__ in capsys.readouterr().out

    def test_no_command_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2
