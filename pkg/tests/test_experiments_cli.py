"""Experiment sweeps, bundle files, and the command-line front end."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np
import pytest

import stackgrad as sg
from stackgrad.cli import EXIT_CONFIG, EXIT_DIVERGED, EXIT_INSTANCE, EXIT_OK, EXIT_ORACLE, main
from stackgrad.errors import ConfigError
from stackgrad.experiments import (
    ANALYSIS_CSV_HEADER,
    SUMMARY_CSV_HEADER,
    ExperimentConfig,
    SolverSettings,
    config_hash,
    load_bundle_summary,
    load_manifest,
    run_sweep,
)


def small_config(out_dir, **overrides) -> ExperimentConfig:
    base = dict(
        instance={"generate": {"n": 3, "m": 2, "seed": 4, "shift": 1.0}},
        oracle=sg.OracleConfig(kind="ball", epsilon=0.0),
        solver=SolverSettings(alpha=0.01, iters=50, delta=0.1),
        epsilons=(0.01, 0.05),
        seeds_per_epsilon=2,
        base_seed=7,
        out_dir=str(out_dir),
    )
    base.update(overrides)
    return ExperimentConfig(**base)


class TestExperimentConfig:
    def test_round_trip(self, tmp_path):
        cfg = small_config(tmp_path / "out")
        doc = cfg.to_dict()
        again = ExperimentConfig.from_dict(json.loads(json.dumps(doc)))
        assert again.to_dict() == doc
        assert config_hash(again) == config_hash(cfg)

    def test_unknown_field_rejected(self):
        with pytest.raises(ConfigError, match="unknown config fields"):
            ExperimentConfig.from_dict({"instance": {"file": "x"}, "mystery": 1})

    def test_bad_instance_source(self, tmp_path):
        with pytest.raises(ConfigError, match="exactly one"):
            small_config(tmp_path, instance={"file": "a", "generate": {"n": 1, "m": 1, "seed": 0}})
        with pytest.raises(ConfigError, match="exactly one"):
            small_config(tmp_path, instance={"nope": 1})

    def test_negative_epsilon_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="epsilon"):
            small_config(tmp_path, epsilons=(-0.1, 0.1))

    def test_empty_epsilons_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="non-empty"):
            small_config(tmp_path, epsilons=())

    def test_bad_seeds_per_epsilon(self, tmp_path):
        with pytest.raises(ConfigError, match="seeds_per_epsilon"):
            small_config(tmp_path, seeds_per_epsilon=0)


class TestRunSweep:
    def test_bundle_contents(self, tmp_path):
        cfg = small_config(tmp_path / "out")
        bundle = run_sweep(cfg)
        out = bundle.write()
        assert (out / "summary.csv").exists()
        assert (out / "analysis.csv").exists()
        assert (out / "manifest.json").exists()
        manifest = load_manifest(out)
        assert manifest["config_hash"] == config_hash(cfg)
        assert len(manifest["runs"]) == 4
        for entry in manifest["runs"]:
            assert (out / entry["trace"]).exists()
        rows = load_bundle_summary(out)
        assert [(r["epsilon"], r["seed"]) for r in rows] == [
            (0.01, 7), (0.01, 8), (0.05, 7), (0.05, 8)
        ]

    def test_rerun_byte_identical(self, tmp_path):
        cfg_a = small_config(tmp_path / "a")
        cfg_b = small_config(tmp_path / "b")
        out_a = run_sweep(cfg_a).write()
        out_b = run_sweep(cfg_b).write()
        assert (out_a / "summary.csv").read_bytes() == (out_b / "summary.csv").read_bytes()
        assert (out_a / "analysis.csv").read_bytes() == (out_b / "analysis.csv").read_bytes()
        for entry in load_manifest(out_a)["runs"]:
            assert (out_a / entry["trace"]).read_bytes() == (out_b / entry["trace"]).read_bytes()

    def test_workers_do_not_change_outputs(self, tmp_path):
        out_seq = run_sweep(small_config(tmp_path / "seq")).write()
        out_par = run_sweep(small_config(tmp_path / "par", workers=4)).write()
        assert (out_seq / "summary.csv").read_bytes() == (out_par / "summary.csv").read_bytes()

    def test_no_nan_inf_in_outputs(self, tmp_path):
        out = run_sweep(small_config(tmp_path / "out")).write()
        for path in sorted(out.rglob("*.csv")):
            text = path.read_text().lower()
            assert "nan" not in text and "inf" not in text, path

    def test_csv_schemas(self, tmp_path):
        out = run_sweep(small_config(tmp_path / "out")).write()
        with open(out / "summary.csv", newline="") as fh:
            assert next(csv.reader(fh)) == SUMMARY_CSV_HEADER
        with open(out / "analysis.csv", newline="") as fh:
            assert next(csv.reader(fh)) == ANALYSIS_CSV_HEADER

    def test_nonconforming_rows_have_empty_bound(self, tmp_path):
        cfg = small_config(tmp_path / "out", epsilons=(0.01, 0.9))
        out = run_sweep(cfg).write()
        rows = load_bundle_summary(out)
        large = [r for r in rows if r["epsilon"] == 0.9]
        assert all(r["theorem_bound"] is None and r["gap"] is None for r in large)
        assert all(r["condition_value"] >= 0 for r in large)

    def test_tightness_skips_nonconforming(self, tmp_path, capsys):
        cfg = small_config(tmp_path / "out", epsilons=(0.01, 0.9))
        bundle = run_sweep(cfg, mode="tightness")
        assert [eps for eps, _ in bundle.skipped] == [0.9]
        assert {res.epsilon for res in bundle.results} == {0.01}
        assert "skipping eps=0.9" in capsys.readouterr().err

    def test_tightness_all_nonconforming_errors(self, tmp_path):
        cfg = small_config(tmp_path / "out", epsilons=(0.8, 0.9))
        with pytest.raises(ConfigError, match="condition"):
            run_sweep(cfg, mode="tightness")

    def test_tightness_rejects_eps_zero(self, tmp_path):
        cfg = small_config(tmp_path / "out", epsilons=(0.0, 0.01))
        with pytest.raises(ConfigError, match="epsilon > 0"):
            run_sweep(cfg, mode="tightness")

    def test_per_seed_epsilon_ordering(self, tmp_path):
        cfg = small_config(tmp_path / "out", epsilons=(0.01, 0.1),
                           solver=SolverSettings(alpha=0.01, iters=1000, delta=0.1))
        rows = run_sweep(cfg).summary_rows()
        by_cell = {(r[0], r[1]): float(r[2]) for r in rows}
        for seed in (7, 8):
            assert by_cell[("0.1", seed)] > by_cell[("0.01", seed)]


class TestCli:
    def test_generate_round_trip(self, tmp_path, capsys):
        out = tmp_path / "instance.json"
        assert main(["generate", "3", "2", "11", "--out", str(out)]) == EXIT_OK
        printed = capsys.readouterr().out
        assert "lambda_min" in printed and "rejections" in printed
        game = sg.load_instance(out)
        sg.save_instance(game, tmp_path / "again.json")
        assert out.read_bytes() == (tmp_path / "again.json").read_bytes()

    def test_generate_passes_validity_suite(self, tmp_path):
        out = tmp_path / "instance.json"
        main(["generate", "4", "3", "2", "--out", str(out)])
        game = sg.load_instance(out)
        sg.effective_matrices(game)
        sc = sg.smoothness_constants(game)
        assert sc.mu_f > 0

    def test_run_with_flags(self, tmp_path, capsys):
        inst = tmp_path / "i.json"
        main(["generate", "3", "2", "4", "--out", str(inst), "--shift", "1.0"])
        out = tmp_path / "bundle"
        code = main([
            "run", "--instance", str(inst), "--out", str(out), "--seed", "7",
            "--eps", "0.01,0.05", "--alpha", "0.01", "--delta", "0.1",
            "--iters", "50", "--oracle", "ball", "--reps", "2",
        ])
        assert code == EXIT_OK
        assert "wrote bundle" in capsys.readouterr().out
        assert len(load_bundle_summary(out)) == 4

    def test_run_deterministic_summary(self, tmp_path):
        inst = tmp_path / "i.json"
        main(["generate", "3", "2", "4", "--out", str(inst), "--shift", "1.0"])
        args = ["run", "--instance", str(inst), "--seed", "3", "--eps", "0.02",
                "--iters", "40", "--oracle", "ball", "--reps", "2"]
        main(args + ["--out", str(tmp_path / "one")])
        main(args + ["--out", str(tmp_path / "two")])
        assert (tmp_path / "one/summary.csv").read_bytes() == (tmp_path / "two/summary.csv").read_bytes()

    def test_run_from_config_file(self, tmp_path):
        cfg = small_config(tmp_path / "bundle")
        cfg_path = tmp_path / "config.json"
        cfg_path.write_text(json.dumps(cfg.to_dict(), indent=2))
        assert main(["run", "--config", str(cfg_path)]) == EXIT_OK
        assert (tmp_path / "bundle" / "summary.csv").exists()

    def test_analyze_matches_library(self, tmp_path, capsys):
        inst = tmp_path / "i.json"
        main(["generate", "5", "4", "1", "--out", str(inst), "--shift", "1.0"])
        capsys.readouterr()
        assert main(["analyze", "--instance", str(inst), "--eps", "0.01", "--delta", "0.1"]) == EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        game = sg.load_instance(inst)
        plan = sg.SamplingPlan(delta=0.1, basis=sg.PositiveBasis.standard_double(5))
        report = sg.constants(game, plan, 0.01)
        assert doc["a"] == report.a
        assert doc["b"] == report.b
        assert doc["pinv_norm"] == pytest.approx(7.0710678, abs=1e-7)
        assert doc["condition_value"] == report.condition_value

    def test_analyze_eps_zero(self, tmp_path, capsys):
        inst = tmp_path / "i.json"
        main(["generate", "3", "2", "4", "--out", str(inst)])
        capsys.readouterr()
        main(["analyze", "--instance", str(inst), "--eps", "0"])
        doc = json.loads(capsys.readouterr().out)
        assert doc["b"] == 0.0
        assert doc["condition_value"] == -1.0
        assert doc["theorem_bound"] == 0.0

    def test_plot_data_exports(self, tmp_path):
        cfg = small_config(tmp_path / "bundle")
        run_sweep(cfg).write()
        assert main(["plot-data", "convergence", "--bundle", str(tmp_path / "bundle"),
                     "--out", str(tmp_path / "conv.csv")]) == EXIT_OK
        assert main(["plot-data", "tightness", "--bundle", str(tmp_path / "bundle"),
                     "--out", str(tmp_path / "tight.csv")]) == EXIT_OK
        with open(tmp_path / "conv.csv", newline="") as fh:
            header = next(csv.reader(fh))
        assert header == ["epsilon", "seed", "k", "err_x"]
        with open(tmp_path / "tight.csv", newline="") as fh:
            header = next(csv.reader(fh))
        assert header == ["epsilon", "theorem_bound", "mean_steady_state_error", "mean_gap"]

    def test_exit_code_config_error(self, tmp_path, capsys):
        assert main(["run", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG
        assert "config error" in capsys.readouterr().err

    def test_exit_code_instance_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"n": 1, "m": 1}')
        assert main(["run", "--instance", str(bad), "--eps", "0.01", "--iters", "5"]) == EXIT_INSTANCE
        assert "instance error" in capsys.readouterr().err

    def test_exit_code_oracle_failure(self, tmp_path, capsys):
        inst = tmp_path / "i.json"
        main(["generate", "3", "2", "4", "--out", str(inst)])
        cfg = dict(
            instance={"file": str(inst)},
            oracle={"kind": "gd", "max_iters": 2},
            solver={"iters": 10},
            epsilons=[1e-13],
            seeds_per_epsilon=1,
            out_dir=str(tmp_path / "bundle"),
        )
        cfg_path = tmp_path / "config.json"
        cfg_path.write_text(json.dumps(cfg))
        assert main(["run", "--config", str(cfg_path)]) == EXIT_ORACLE
        assert "oracle_failure" in capsys.readouterr().err

    def test_exit_code_divergence(self, tmp_path, capsys):
        inst = tmp_path / "i.json"
        main(["generate", "3", "2", "4", "--out", str(inst)])
        code = main(["run", "--instance", str(inst), "--eps", "0.01", "--iters", "200",
                     "--alpha", "1e9", "--reps", "1"])
        assert code == EXIT_DIVERGED
        assert "diverged" in capsys.readouterr().err

    def test_missing_sources_is_config_error(self, capsys):
        assert main(["run", "--eps", "0.01"]) == EXIT_CONFIG
        capsys.readouterr()
