"""End-to-end CLI behavior: artifacts, exit codes, determinism."""

import csv
import hashlib
import json
import math
import os

import numpy as np
import pytest

from thumbopt.cli import main
from thumbopt.config import (
    REFERENCE_AXIS_DEG,
    reference_config_dict,
)

DEG = math.pi / 180.0


def omega_str(axis=None):
    a = axis or REFERENCE_AXIS_DEG
    return (f"{a['x']},{a['y']},{a['z']},{a['roll_deg']},"
            f"{a['pitch_deg']},{a['yaw_deg']}")


def write_config(tmp_path, name="run.json", grid=None, samples=None,
                 thumb_steps=None, **overrides):
    cfg = reference_config_dict(grid=grid, samples=samples,
                                thumb_steps=thumb_steps)
    for key, val in overrides.items():
        cfg[key] = val
    path = tmp_path / name
    path.write_text(json.dumps(cfg, indent=1))
    return str(path)


def singleton_grid_at(axis=None):
    a = axis or REFERENCE_AXIS_DEG
    return {
        "x_mm": {"min": a["x"], "max": a["x"], "count": 1},
        "y_mm": {"min": a["y"], "max": a["y"], "count": 1},
        "z_mm": {"min": a["z"], "max": a["z"], "count": 1},
        "roll_deg": {"min": a["roll_deg"], "max": a["roll_deg"], "count": 1},
        "pitch_deg": {"min": a["pitch_deg"], "max": a["pitch_deg"], "count": 1},
        "yaw_deg": {"min": a["yaw_deg"], "max": a["yaw_deg"], "count": 1},
    }


def tiny_grid_around(axis=None, span=6.0, counts=(2, 2, 2, 1, 1, 2)):
    a = axis or REFERENCE_AXIS_DEG
    names = [("x_mm", "x"), ("y_mm", "y"), ("z_mm", "z"),
             ("roll_deg", "roll_deg"), ("pitch_deg", "pitch_deg"),
             ("yaw_deg", "yaw_deg")]
    grid = {}
    for (gkey, akey), count in zip(names, counts):
        center = a[akey]
        half = span if gkey.endswith("_mm") else 4.0
        grid[gkey] = {"min": center - half, "max": center + half,
                      "count": count}
    return grid


class TestOptimizeCommand:
    def test_singleton_grid_artifacts(self, tmp_path, capsys):
        cfg_path = write_config(tmp_path, grid=singleton_grid_at())
        out_dir = str(tmp_path / "out")
        code = main(["optimize", cfg_path, "--workers", "1", "--out", out_dir])
        assert code == 0
        result = json.loads((tmp_path / "out" / "result.json").read_text())
        assert result["evaluated_count"] == 1
        assert result["valid_count"] == 1
        assert result["omega_opt"] is not None
        assert not result["w_interval"]["empty"]
        with open(tmp_path / "out" / "topk.csv") as fh:
            lines = fh.read().splitlines()
        assert lines[0].startswith("# grid_hash=")
        rows = list(csv.reader(lines[1:]))
        assert len(rows) == 2  # header + one config
        assert (tmp_path / "out" / "heatmap.svg").exists()
        assert (tmp_path / "out" / "run_log.json").exists()

    def test_infeasible_requirements_exit_2(self, tmp_path):
        grid = singleton_grid_at({"x": 900.0, "y": 900.0, "z": 900.0,
                                  "roll_deg": 0.0, "pitch_deg": 0.0,
                                  "yaw_deg": 0.0})
        cfg_path = write_config(tmp_path, grid=grid, samples=8, thumb_steps=12)
        code = main(["optimize", cfg_path, "--workers", "1",
                     "--out", str(tmp_path / "out")])
        assert code == 2
        result = json.loads((tmp_path / "out" / "result.json").read_text())
        assert result["omega_opt"] is None
        assert result["top_k"] == []

    def test_config_error_exit_1(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{не json")
        assert main(["optimize", str(path)]) == 1

    def test_repeat_runs_identical_artifacts(self, tmp_path):
        cfg_path = write_config(tmp_path, grid=tiny_grid_around(),
                                samples=12, thumb_steps=48)

        def run(out_name):
            out = str(tmp_path / out_name)
            main(["optimize", cfg_path, "--workers", "1", "--out", out])
            hashes = {}
            for fname in ("result.json", "topk.csv", "heatmap.svg"):
                p = tmp_path / out_name / fname
                if p.exists():
                    hashes[fname] = hashlib.sha256(p.read_bytes()).hexdigest()
            return hashes

        first = run("out_a")
        second = run("out_b")
        assert first == second
        assert "result.json" in first and "topk.csv" in first

    def test_workers_env_honored(self, tmp_path, monkeypatch):
        monkeypatch.setenv("THUMBOPT_WORKERS", "2")
        cfg_path = write_config(tmp_path, grid=singleton_grid_at(),
                                samples=8, thumb_steps=12)
        out = str(tmp_path / "out")
        main(["optimize", cfg_path, "--out", out])
        log = json.loads((tmp_path / "out" / "run_log.json").read_text())
        assert log["workers"] == 2


class TestCheckCommand:
    def test_round_trip_with_optimize(self, tmp_path, capsys):
        cfg_path = write_config(tmp_path, grid=singleton_grid_at())
        out = str(tmp_path / "out")
        main(["optimize", cfg_path, "--workers", "1", "--out", out])
        capsys.readouterr()
        result = json.loads((tmp_path / "out" / "result.json").read_text())
        w_expected = result["w_interval"]

        code = main(["check", cfg_path, "--omega", omega_str()])
        captured = capsys.readouterr()
        assert code == 0
        assert "overall: VALID" in captured.out
        lo_hi = [ln for ln in captured.out.splitlines() if ln.startswith("W: [")]
        assert lo_hi
        nums = lo_hi[0].replace("W: [", "").split("]")[0].split(",")
        assert abs(float(nums[0]) - w_expected["lo"]) < 5e-4
        assert abs(float(nums[1]) - w_expected["hi"]) < 5e-4

    def test_all_zero_omega_deterministic(self, tmp_path, capsys):
        cfg_path = write_config(tmp_path, grid=singleton_grid_at(),
                                samples=8, thumb_steps=12)
        code1 = main(["check", cfg_path, "--omega", "0,0,0,0,0,0"])
        out1 = capsys.readouterr().out
        code2 = main(["check", cfg_path, "--omega", "0,0,0,0,0,0"])
        out2 = capsys.readouterr().out
        assert code1 == code2 == 0
        assert out1 == out2

    def test_malformed_omega_usage_error(self, tmp_path):
        cfg_path = write_config(tmp_path, grid=singleton_grid_at(),
                                samples=8, thumb_steps=12)
        assert main(["check", cfg_path, "--omega", "1,2,3,4,5"]) == 2


class TestVerifyCommand:
    def test_pristine_build_passes(self, capsys):
        assert main(["verify"]) == 0
        out = capsys.readouterr().out
        assert "delta_m/table" in out

    def test_perturbed_geometry_fails(self, capsys):
        assert main(["verify", "--perturb-mm", "1.0"]) == 1


class TestTransitionCommand:
    @pytest.fixture
    def optimized(self, tmp_path):
        cfg_path = write_config(tmp_path, grid=singleton_grid_at())
        out = str(tmp_path / "out")
        main(["optimize", cfg_path, "--workers", "1", "--out", out])
        result = json.loads((tmp_path / "out" / "result.json").read_text())
        return cfg_path, result

    def test_width_inside_w_holds(self, optimized, tmp_path, capsys):
        cfg_path, result = optimized
        iv = result["w_interval"]
        width = (iv["lo"] + iv["hi"]) / 2.0
        out_csv = str(tmp_path / "steps.csv")
        code = main(["transition", cfg_path, "--omega", omega_str(),
                     "--width", str(width), "--out", out_csv])
        captured = capsys.readouterr()
        assert code == 0
        assert "PASS" in captured.err
        with open(out_csv) as fh:
            rows = list(csv.DictReader(fh))
        assert rows and all(r["hold_ok"] == "yes" for r in rows)

    def test_width_outside_w_fails_some_step(self, optimized, tmp_path, capsys):
        cfg_path, result = optimized
        width = result["w_interval"]["hi"] + 2.0
        out_csv = str(tmp_path / "steps.csv")
        code = main(["transition", cfg_path, "--omega", omega_str(),
                     "--width", str(width), "--out", out_csv])
        captured = capsys.readouterr()
        assert code == 0
        assert "FAIL" in captured.err
        with open(out_csv) as fh:
            rows = list(csv.DictReader(fh))
        assert any(r["hold_ok"] == "NO" for r in rows)

    def test_incapable_configuration_exit_2(self, tmp_path):
        cfg_path = write_config(tmp_path, grid=singleton_grid_at(),
                                samples=8, thumb_steps=12)
        code = main(["transition", cfg_path, "--omega", "900,900,900,0,0,0",
                     "--width", "10"])
        assert code == 2

    def test_width_sweep_table_5_to_30(self, optimized, tmp_path, capsys):
        cfg_path, result = optimized
        iv = result["w_interval"]
        verdicts = {}
        for w in range(5, 31, 5):
            code = main(["transition", cfg_path, "--omega", omega_str(),
                         "--width", str(float(w)),
                         "--out", str(tmp_path / f"w{w}.csv")])
            captured = capsys.readouterr()
            assert code == 0
            verdicts[w] = "PASS" in captured.err
        # widths inside W hold, widths far outside do not
        for w, ok in verdicts.items():
            if iv["lo"] <= w <= iv["hi"]:
                assert ok
            if w > iv["hi"] + 2 * 4.87:
                assert not ok

    def test_negative_width_usage_error(self, tmp_path):
        cfg_path = write_config(tmp_path, grid=singleton_grid_at(),
                                samples=8, thumb_steps=12)
        code = main(["transition", cfg_path, "--omega", omega_str(),
                     "--width", "-1"])
        assert code == 2
