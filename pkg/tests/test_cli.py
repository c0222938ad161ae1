import json
import os

import numpy as np
import pytest

from ccbeam.cli import main
from ccbeam.placement import PlacementMatrix


V1_TEXT = "2 4 2\n1 0 1 0\n0 1 0 1\n"


def run_cli(*args):
    return main(list(args))


class TestRun:
    def test_cdf_scenario_writes_artifacts(self, tmp_path):
        out = tmp_path / "run"
        code = run_cli("run", "cdf-fig4to6", "--trials", "3", "--seed", "5",
                       "--gammas", "EP,PL", "--out", str(out))
        assert code == 0
        for name in ("samples.csv", "cdf.csv", "improvement.csv", "manifest.json"):
            assert (out / name).exists(), name
        header = (out / "samples.csv").read_text().splitlines()[0]
        assert header == "trial,gamma,P,snr_db,mode,maxmin,r_s,T,R"
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["seed"] == 5
        assert manifest["trials"] == 3
        assert len(manifest["placements"]) == 3

    def test_rerun_reproduces_bytes(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out, workers in ((a, "1"), (b, "2")):
            assert run_cli("run", "cdf-fig4to6", "--trials", "4", "--seed", "9",
                           "--gammas", "EP", "--workers", workers,
                           "--out", str(out)) == 0
        assert (a / "samples.csv").read_bytes() == (b / "samples.csv").read_bytes()
        assert (a / "cdf.csv").read_bytes() == (b / "cdf.csv").read_bytes()

    def test_bars_scenario_with_snr_override(self, tmp_path):
        out = tmp_path / "bars"
        code = run_cli("run", "bars-fig1to3", "--trials", "2", "--seed", "3",
                       "--snr", "0", "--gammas", "EP", "--out", str(out))
        assert code == 0
        lines = (out / "improvement.csv").read_text().splitlines()
        assert lines[0] == "gamma,P,snr_db,baseline_P,improvement_pct"
        base = [ln for ln in lines[1:] if ln.split(",")[1] == "3"]
        assert all(float(ln.split(",")[4]) == 0.0 for ln in base)

    def test_unknown_scenario_exits_2(self, tmp_path):
        assert run_cli("run", "no-such-thing", "--out", str(tmp_path)) == 2

    def test_custom_requires_config(self, tmp_path):
        assert run_cli("run", "custom", "--out", str(tmp_path)) == 2

    def test_custom_config(self, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("k = 4\nt = 2\nplacements = 2,4\nsnr_db = 0\n"
                       "trials = 2\ngammas = EP\nmode = lowsnr\nseed = 1\n")
        out = tmp_path / "out"
        assert run_cli("run", "custom", "--config", str(cfg), "--out", str(out)) == 0
        rows = (out / "samples.csv").read_text().splitlines()
        assert len(rows) == 1 + 2 * 2  # header + trials x placements

    def test_config_with_placement_file(self, tmp_path):
        vfile = tmp_path / "v1.txt"
        vfile.write_text(V1_TEXT)
        cfg = tmp_path / "exp.cfg"
        cfg.write_text(f"k = 4\nt = 2\nplacements = {vfile}\nsnr_db = 0\n"
                       "trials = 1\ngammas = EP\n")
        out = tmp_path / "out"
        assert run_cli("run", "custom", "--config", str(cfg), "--out", str(out)) == 0

    def test_bad_config_key_exits_2(self, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("k = 4\nt = 2\nwat = 7\nplacements = 2\nsnr_db = 0\n")
        assert run_cli("run", "custom", "--config", str(cfg),
                       "--out", str(tmp_path / "o")) == 2

    def test_env_seed_fallback(self, tmp_path, monkeypatch):
        monkeypatch.setenv("CCBEAM_SEED", "777")
        out = tmp_path / "envseed"
        assert run_cli("run", "cdf-fig4to6", "--trials", "1", "--gammas", "EP",
                       "--out", str(out)) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["seed"] == 777


class TestValidate:
    def test_valid_placement_file(self, tmp_path, capsys):
        f = tmp_path / "v1.txt"
        f.write_text(V1_TEXT)
        assert run_cli("validate", str(f)) == 0
        out = capsys.readouterr().out
        assert "all checks passed" in out
        assert "n(V) = 4" in out

    def test_row_sum_violation_listed(self, tmp_path, capsys):
        f = tmp_path / "bad.txt"
        f.write_text("2 4 2\n1 1 1 0\n0 0 0 1\n")
        assert run_cli("validate", str(f)) == 1
        out = capsys.readouterr().out
        assert "FAIL" in out and "rows" in out

    def test_config_k_not_t_plus_l(self, tmp_path, capsys):
        f = tmp_path / "bad.cfg"
        f.write_text("k = 4\nt = 4\nplacements = 2\nsnr_db = 0\n")
        assert run_cli("validate", str(f)) == 1
        assert "K = t + L" in capsys.readouterr().out

    def test_valid_config(self, tmp_path, capsys):
        f = tmp_path / "ok.cfg"
        f.write_text("k = 6\nt = 3\nplacements = 2,8,20\nsnr_db = 0\n")
        assert run_cli("validate", str(f)) == 0
        out = capsys.readouterr().out
        assert "P20" in out

    def test_missing_file(self, tmp_path):
        assert run_cli("validate", str(tmp_path / "nope.txt")) == 2
