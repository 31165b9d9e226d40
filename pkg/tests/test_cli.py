import json
import math
from pathlib import Path

import numpy as np
import pytest
import yaml

from gkpcavity import cli
from gkpcavity.cli import ConfigError, load_config, main


def write_yaml(path, payload):
    path.write_text(yaml.safe_dump(payload))
    return str(path)


SWEEP_CFG = {
    "kind": "sweep",
    "protocol": "cavity",
    "c0": [120.0, 400.0],
    "steps": [1],
    "budget": 55,
    "seed": 3,
    "optimize": ["eta", "r"],
}

STATE_CFG = {
    "kind": "state",
    "protocol": "cavity",
    "c0": 200.0,
    "steps": 1,
    "eta": 0.952,
    "r": 0.83,
    "scale": 1.04,
    "grid": {"max": 6.0, "points": 31},
}


class TestConfigLoading:
    def test_roundtrip(self, tmp_path):
        cfg = load_config(write_yaml(tmp_path / "ok.yaml", SWEEP_CFG))
        assert cfg["protocol"] == "cavity"

    def test_unknown_key_rejected(self, tmp_path):
        bad = dict(SWEEP_CFG, frobnicate=1)
        with pytest.raises(ConfigError, match="frobnicate"):
            load_config(write_yaml(tmp_path / "bad.yaml", bad))

    def test_missing_required(self, tmp_path):
        bad = {"kind": "sweep", "protocol": "cavity"}
        with pytest.raises(ConfigError):
            load_config(write_yaml(tmp_path / "bad.yaml", bad))

    def test_unknown_kind(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(write_yaml(tmp_path / "bad.yaml", {"kind": "dance"}))

    def test_malformed_yaml(self, tmp_path):
        path = tmp_path / "broken.yaml"
        path.write_text("kind: [unclosed")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_config_error_exit_code(self, tmp_path, capsys):
        path = write_yaml(tmp_path / "bad.yaml", {"kind": "sweep"})
        assert main(["sweep", "--config", path, "--out", str(tmp_path)]) == 2
        err = capsys.readouterr().err
        assert json.loads(err.strip())["error"] == "config"


class TestSweepCommand:
    def test_csv_and_sidecar(self, tmp_path):
        cfg_path = write_yaml(tmp_path / "sweep.yaml", SWEEP_CFG)
        out = tmp_path / "out"
        assert main(["sweep", "--config", cfg_path, "--out", str(out)]) == 0
        lines = (out / "sweep.csv").read_text().splitlines()
        assert lines[0] == ",".join(cli.CSV_COLUMNS)
        assert len(lines) == 3
        sidecar = json.loads((out / "sweep.json").read_text())
        assert sidecar["schema"] == "gkpcavity/sweep_result.v1"
        assert sidecar["seed"] == 3
        assert len(sidecar["points"]) == 2

    def test_byte_identical_reruns(self, tmp_path):
        cfg_path = write_yaml(tmp_path / "sweep.yaml", SWEEP_CFG)
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert main(["sweep", "--config", cfg_path, "--out", str(out)]) == 0
            outs.append((out / "sweep.csv").read_bytes())
        assert outs[0] == outs[1]

    def test_empty_c0_list(self, tmp_path):
        cfg = dict(SWEEP_CFG, c0=[])
        cfg_path = write_yaml(tmp_path / "sweep.yaml", cfg)
        out = tmp_path / "out"
        assert main(["sweep", "--config", cfg_path, "--out", str(out)]) == 0
        assert (out / "sweep.csv").read_text() == ",".join(cli.CSV_COLUMNS) + "\n"

    def test_seed_override_changes_search(self, tmp_path):
        cfg_path = write_yaml(tmp_path / "sweep.yaml", SWEEP_CFG)
        out1, out2 = tmp_path / "s3", tmp_path / "s4"
        main(["sweep", "--config", cfg_path, "--out", str(out1)])
        main(["sweep", "--config", cfg_path, "--out", str(out2), "--seed", "4"])
        assert json.loads((out2 / "sweep.json").read_text())["seed"] == 4


class TestStateCommand:
    def test_cavity_state_files(self, tmp_path):
        cfg_path = write_yaml(tmp_path / "state.yaml", STATE_CFG)
        out = tmp_path / "out"
        assert main(["state", "--config", cfg_path, "--out", str(out)]) == 0
        for name in ("wigner.csv", "quadrature_x.csv", "quadrature_p.csv",
                     "report.json"):
            assert (out / name).exists()
        report = json.loads((out / "report.json").read_text())
        assert report["schema"] == "gkpcavity/state_report.v1"
        assert report["min_dB"] == pytest.approx(4.41, abs=0.05)
        wigner = (out / "wigner.csv").read_text().splitlines()
        assert wigner[0] == "x,p,W"
        assert len(wigner) == 1 + 31 * 31
        # Wigner grid integrates to ~1
        weights = np.array([float(l.split(",")[2]) for l in wigner[1:]])
        step = 12.0 / 30
        assert np.sum(weights) * step * step == pytest.approx(1.0, abs=1e-3)

    def test_breeding_state_files(self, tmp_path):
        cfg = {
            "kind": "state", "protocol": "breeding", "c0": 200.0, "steps": 2,
            "eta": 0.9526, "r": 1.27, "scale": 1.058,
            "grid": {"max": 6.0, "points": 21},
        }
        cfg_path = write_yaml(tmp_path / "state.yaml", cfg)
        out = tmp_path / "out"
        assert main(["state", "--config", cfg_path, "--out", str(out)]) == 0
        report = json.loads((out / "report.json").read_text())
        assert report["min_dB"] == pytest.approx(5.48, abs=0.1)
        dens = [
            float(line.split(",")[1])
            for line in (out / "quadrature_p.csv").read_text().splitlines()[1:]
        ]
        assert min(dens) > -1e-9

    def test_missing_eta_is_config_error(self, tmp_path):
        cfg = {k: v for k, v in STATE_CFG.items() if k != "eta"}
        cfg_path = write_yaml(tmp_path / "state.yaml", cfg)
        assert main(["state", "--config", cfg_path, "--out", str(tmp_path)]) == 2


class TestVerifyCommand:
    def test_fast_verify_passes(self, tmp_path, capsys):
        out = tmp_path / "v"
        assert main(["verify", "--fast", "--out", str(out)]) == 0
        table = capsys.readouterr().out
        assert "PASS" in table
        assert "6.6" in table  # the analytic dB anchors appear in the report
        payload = json.loads((out / "verify_report.json").read_text())
        assert payload["all_passed"] is True

    def test_tampered_constant_fails(self, monkeypatch):
        import gkpcavity.acceptance as acc

        monkeypatch.setattr(
            acc, "two_level_expectation", lambda a, n: -((a - 0.6) ** 2)
        )
        assert main(["verify", "--fast"]) == 1
