import json

import numpy as np
import pytest

from blinkbench import cli, read_results_csv


def tiny_config(out_dir, **overrides):
    cfg = {
        "synthesis": {
            "montage": ["FP1", "FP2", "F3", "F4"],
            "fs": 120.0,
            "duration_s": 65.0,
            "blink_amplitude_uv": 300.0,
            "channel_rms_uv": 10.0,
        },
        "n_datasets": 1,
        "electrode_configs": ["all"],
        "algorithms": ["fastica_deflation"],
        "snr_grid_db": {"start": 10.0, "stop": 10.0, "step": 2.5},
        "include_baseline": True,
        "n_iterations": 2,
        "segment_samples": 3000,
        "master_seed": 7,
        "output_dir": str(out_dir),
    }
    cfg.update(overrides)
    return cfg


def write_config(tmp_path, cfg):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(cfg))
    return str(path)


class TestConfigValidation:
    def test_zero_step_rejected_before_work(self, tmp_path, capsys):
        cfg = tiny_config(tmp_path / "out")
        cfg["snr_grid_db"]["step"] = 0.0
        rc = cli.main(["synth", "--config", write_config(tmp_path, cfg)])
        assert rc == 1
        assert "snr_grid_db.step" in capsys.readouterr().err
        assert not (tmp_path / "out").exists()

    def test_missing_field_named(self, tmp_path, capsys):
        cfg = tiny_config(tmp_path / "out")
        del cfg["n_iterations"]
        rc = cli.main(["synth", "--config", write_config(tmp_path, cfg)])
        assert rc == 1
        assert "n_iterations" in capsys.readouterr().err

    def test_unknown_algorithm_named(self, tmp_path, capsys):
        cfg = tiny_config(tmp_path / "out", algorithms=["sobi"])
        rc = cli.main(["sweep", "--config", write_config(tmp_path, cfg)])
        assert rc == 1
        assert "sobi" in capsys.readouterr().err

    def test_snr_levels_default_grid(self):
        cfg = cli.load_config(json.loads(json.dumps(cli.DEFAULT_CONFIG)))
        levels = [l for l in cfg.snr_levels() if not np.isinf(l)]
        assert len(levels) == 9
        assert levels[0] == 0.0 and levels[-1] == 20.0
        assert np.allclose(np.diff(levels), 2.5)

    def test_default_config_mirrors_experiment_shape(self):
        cfg = cli.load_config(json.loads(json.dumps(cli.DEFAULT_CONFIG)))
        assert cfg.n_datasets == 6
        assert len(cfg.electrode_configs) == 5
        assert len(cfg.algorithms) == 2
        assert cfg.n_iterations == 100
        assert cfg.segment_samples == 60000
        assert cfg.master_seed == 42


class TestSynthCommand:
    def test_writes_datasets_and_sidecars(self, tmp_path, capsys):
        out = tmp_path / "out"
        cfg = tiny_config(out, n_datasets=6)
        rc = cli.main(["synth", "--config", write_config(tmp_path, cfg)])
        assert rc == 0
        for k in range(6):
            assert (out / f"dataset_{k:02d}.csv").exists()
            assert (out / f"dataset_{k:02d}.truth.json").exists()
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 12

    def test_idempotent(self, tmp_path):
        out = tmp_path / "out"
        path = write_config(tmp_path, tiny_config(out))
        assert cli.main(["synth", "--config", path]) == 0
        first = (out / "dataset_00.csv").read_bytes()
        assert cli.main(["synth", "--config", path]) == 0
        assert (out / "dataset_00.csv").read_bytes() == first

    def test_sidecar_contents(self, tmp_path):
        out = tmp_path / "out"
        assert cli.main(["synth", "--config",
                         write_config(tmp_path, tiny_config(out))]) == 0
        truth = json.loads((out / "dataset_00.truth.json").read_text())
        assert truth["reference_label"] == "LO1"
        assert len(truth["kernel_uv"]) == 120
        assert truth["topography"]["FP1"] >= 0.8
        assert all(t + 1.0 <= 65.0 for t in truth["blink_timestamps_s"])


class TestSweepCommand:
    def test_smoke_sweep(self, tmp_path):
        out = tmp_path / "out"
        cfg = tiny_config(out, include_baseline=False, n_iterations=1)
        path = write_config(tmp_path, cfg)
        assert cli.main(["synth", "--config", path]) == 0
        assert cli.main(["sweep", "--config", path]) == 0
        rows = read_results_csv(out / "results.csv")
        assert len(rows) == 1
        summary = json.loads((out / "summary.json").read_text())
        leaf = summary["dataset_00"]["all"]["fastica_deflation"]["10.0"]
        assert leaf["n_trials"] == 1
        assert leaf["q"] is None  # no baseline in the grid

    def test_missing_datasets(self, tmp_path, capsys):
        cfg = tiny_config(tmp_path / "nowhere")
        rc = cli.main(["sweep", "--config", write_config(tmp_path, cfg)])
        assert rc == 1
        assert "synth" in capsys.readouterr().err

    def test_deterministic_results(self, tmp_path):
        out = tmp_path / "out"
        path = write_config(tmp_path, tiny_config(out, n_iterations=3))
        assert cli.main(["synth", "--config", path]) == 0
        assert cli.main(["sweep", "--config", path]) == 0
        first = read_results_csv(out / "results.csv")
        assert cli.main(["sweep", "--config", path, "--workers", "3"]) == 0
        second = read_results_csv(out / "results.csv")
        for a, b in zip(first, second):
            assert a.rho == b.rho and a.seed == b.seed


class TestReportCommand:
    @pytest.fixture()
    def swept(self, tmp_path):
        out = tmp_path / "out"
        cfg = tiny_config(
            out, n_iterations=2,
            snr_grid_db={"start": 0.0, "stop": 20.0, "step": 2.5},
        )
        path = write_config(tmp_path, cfg)
        assert cli.main(["synth", "--config", path]) == 0
        assert cli.main(["sweep", "--config", path]) == 0
        return out

    def test_tables_emitted(self, swept):
        assert cli.main(["report", str(swept / "results.csv")]) == 0
        corr = (swept / "correlation_vs_snr.csv").read_text().splitlines()
        degr = (swept / "degradation_vs_snr.csv").read_text().splitlines()
        times = (swept / "time_vs_snr.csv").read_text().splitlines()
        assert corr[0] == "config,algorithm,snr_db,mean_rho,std_rho,n"
        assert len(degr) - 1 == 9  # one row per noisy level
        assert len(corr) - 1 == 10  # baseline included
        assert len(times) - 1 == 10

    def test_degradation_matches_summary_json(self, swept):
        # single dataset: pooled report values must equal the summary tree
        assert cli.main(["report", str(swept / "results.csv")]) == 0
        summary = json.loads((swept / "summary.json").read_text())
        leaf = summary["dataset_00"]["all"]["fastica_deflation"]
        degr = (swept / "degradation_vs_snr.csv").read_text().splitlines()[1:]
        corr = (swept / "correlation_vs_snr.csv").read_text().splitlines()[1:]
        for line in degr:
            config, algorithm, snr, q = line.split(",")
            assert abs(float(q) - leaf[snr]["q"]) < 1e-12
        for line in corr:
            config, algorithm, snr, mean_rho, _, _ = line.split(",")
            assert abs(float(mean_rho) - leaf[snr]["mean_rho"]) < 1e-12

    def test_no_baseline_warns(self, tmp_path, capsys):
        out = tmp_path / "out"
        cfg = tiny_config(out, include_baseline=False)
        path = write_config(tmp_path, cfg)
        assert cli.main(["synth", "--config", path]) == 0
        assert cli.main(["sweep", "--config", path]) == 0
        assert cli.main(["report", str(out / "results.csv")]) == 0
        assert "no baseline" in capsys.readouterr().err
        degr = (out / "degradation_vs_snr.csv").read_text().splitlines()
        assert len(degr) == 1  # header only

    def test_missing_results_file(self, tmp_path):
        assert cli.main(["report", str(tmp_path / "absent.csv")]) == 1


class TestCharacterizeCommand:
    def test_gaussian_file(self, tmp_path, capsys):
        samples = np.random.default_rng(12).standard_normal(15000)
        path = tmp_path / "samples.txt"
        path.write_text("\n".join(repr(v) for v in samples.tolist()))
        rc = cli.main(["characterize", str(path), "--out", str(tmp_path / "rep")])
        assert rc == 0
        out = capsys.readouterr().out
        assert "skewness" in out and "max_cdf_distance" in out
        report = json.loads((tmp_path / "rep" / "gaussianity_report.json").read_text())
        assert abs(report["skewness"]) < 0.07
        assert abs(report["kurtosis"] - 3.0) < 0.14

    def test_constant_file(self, tmp_path, capsys):
        path = tmp_path / "flat.txt"
        path.write_text("\n".join(["2.0"] * 100))
        assert cli.main(["characterize", str(path)]) == 1
        assert "zero-variance" in capsys.readouterr().err

    def test_non_numeric_row_named(self, tmp_path, capsys):
        path = tmp_path / "bad.txt"
        path.write_text("1.0\n2.0\nbogus\n")
        assert cli.main(["characterize", str(path)]) == 1
        assert "line 3" in capsys.readouterr().err


class TestExitCodes:
    def test_unknown_command_is_user_error(self, capsys):
        assert cli.main(["frobnicate"]) == 1

    def test_bad_json_config(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        assert cli.main(["synth", "--config", str(path)]) == 1
        assert "JSON" in capsys.readouterr().err
