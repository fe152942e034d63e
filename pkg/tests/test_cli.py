import json
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from bergman.cli import main


def run_cli(args):
    return main(list(args))


class TestWeightsCommand:
    def test_grid_csv_values(self, tmp_path):
        code = run_cli(["weights", "--out", str(tmp_path), "--kmax", "6"])
        assert code == 0
        lines = (tmp_path / "grid.csv").read_text().splitlines()
        assert lines[0] == "k,r_k,ratio"
        rows = [line.split(",") for line in lines[1:]]
        # constant weight: r_k = 1 - 2^(-k-1)
        for k in range(6):
            assert float(rows[k][1]) == pytest.approx(1 - 2.0 ** -(k + 1), abs=1e-12)
        diag = json.loads((tmp_path / "weight_diagnostics.json").read_text())
        assert diag["in_class_s_empirically"] is True

    def test_manifest_written(self, tmp_path):
        run_cli(["weights", "--out", str(tmp_path), "--kmax", "4"])
        man = json.loads((tmp_path / "manifest.json").read_text())
        assert man["status"] == "ok"
        assert man["seed"] == 0
        assert "tolerances" in man and "timestamp" in man


class TestCarlesonCommand:
    def test_reference_measure_verdict(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(
            json.dumps(
                {
                    "weight": {"family": "constant", "n": 1},
                    "measure": {"type": "radial", "s": 0.0},
                    "kmax": 8,
                }
            )
        )
        out = tmp_path / "out"
        assert run_cli(["carleson", "--config", str(cfg), "--out", str(out)]) == 0
        verdict = json.loads((out / "carleson_verdict.json").read_text())
        assert verdict["verdicts"]["carleson"] is True
        assert verdict["verdicts"]["vanishing"] is False
        assert "thresholds" in verdict


class TestConfigHandling:
    def test_invalid_json_exits_2_without_artifacts(self, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text("{not json")
        out = tmp_path / "out"
        assert run_cli(["weights", "--config", str(cfg), "--out", str(out)]) == 2
        assert not out.exists()

    def test_schema_violation_exits_2(self, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"p": [0.5]}))
        assert run_cli(["weights", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2

    def test_bad_weight_params_exit_2(self, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"weight": {"family": "power", "n": 1, "beta": 2.0}}))
        assert run_cli(["weights", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2

    def test_env_override(self, tmp_path, monkeypatch):
        monkeypatch.setenv("BERGMAN_KMAX", "3")
        run_cli(["weights", "--out", str(tmp_path)])
        lines = (tmp_path / "grid.csv").read_text().splitlines()
        assert len(lines) == 1 + 3 + 2  # header + kmax + guard radius + r_0


class TestDeterminism:
    def test_identical_config_and_seed_byte_identical_csv(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(
            json.dumps(
                {
                    "weight": {"family": "power", "n": 1, "beta": 0.5},
                    "measure": {"type": "ball_sum", "centers": [[0.5, 0.0], [0.9, 0.0]],
                                "coefficients": [1.0, 0.5], "epsilon": 0.1},
                    "kmax": 5,
                    "seed": 42,
                }
            )
        )
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert run_cli(["carleson", "--config", str(cfg), "--out", str(out)]) == 0
            outs.append((out / "carleson_profile.csv").read_bytes())
        assert outs[0] == outs[1]


class TestEntryPoint:
    def test_module_invocation(self, tmp_path):
        env = dict(os.environ)
        env["PYTHONPATH"] = str(Path(__file__).resolve().parents[1] / "src")
        proc = subprocess.run(
            [sys.executable, "-m", "bergman", "weights", "--out", str(tmp_path), "--kmax", "3"],
            capture_output=True,
            env=env,
        )
        assert proc.returncode == 0, proc.stderr.decode()
        assert (tmp_path / "grid.csv").exists()
