"""Command-line surface: formats, config plumbing, manifests, exits."""

import csv
import hashlib
import json

import numpy as np
import pytest

from planar_pendulum import InteractionParams, solve_spectrum, switch_on_populations
from planar_pendulum.cli import ConfigError, main, parse_range


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


# --- range grammar ----------------------------------------------------------

def test_parse_range_inclusive_endpoint():
    vals = parse_range("-40:0:0.1")
    assert len(vals) == 401
    assert vals[0] == -40.0
    assert vals[-1] == pytest.approx(0.0, abs=1e-12)


def test_parse_range_endpoint_within_half_step():
    # 0.9999 is within half a step of 0:1:0.25's last point
    assert len(parse_range("0:0.9999:0.25")) == 5
    assert len(parse_range("0:0.874:0.25")) == 4   # 0.874 < 0.875 cutoff
    assert len(parse_range("3:3:1")) == 1


@pytest.mark.parametrize("text", ["1:2", "a:b:c", "0:1:0", "0:1:-0.5", "5:1:1"])
def test_parse_range_rejects(text):
    with pytest.raises(ConfigError):
        parse_range(text)


# --- commands ---------------------------------------------------------------

def test_spectrum_deterministic_bytes(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    argv = ["spectrum", "--zeta", "25", "--eta-range", "-10:-8:1",
            "--n-states", "3", "--output", "a.csv"]
    assert main(argv) == 0
    assert main(["spectrum", "--zeta", "25", "--eta-range", "-10:-8:1",
                 "--n-states", "3", "--output", "b.csv"]) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    rows = read_csv(tmp_path / "a.csv")
    assert len(rows) == 9
    spec = solve_spectrum(InteractionParams(-10.0, 25.0), 3)
    assert float(rows[0]["energy"]) == pytest.approx(float(spec.energies[0]),
                                                     abs=1e-12)
    assert rows[0]["symmetry"] == "A1"


def test_manifest_lists_checksums(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    main(["spectrum", "--zeta", "25", "--eta", "-10", "--output", "s.csv"])
    manifest = json.loads((tmp_path / "s.manifest.json").read_text())
    assert manifest["command"] == "spectrum"
    assert manifest["version"]
    assert manifest["config"]["zeta"] == 25.0
    entry = manifest["outputs"][0]
    digest = hashlib.sha256((tmp_path / "s.csv").read_bytes()).hexdigest()
    assert entry["sha256"] == digest
    assert entry["bytes"] == (tmp_path / "s.csv").stat().st_size


def test_config_file_mirror_and_override(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"command": "spectrum", "zeta": 25,
                               "eta": -10, "n-states": 4,
                               "output": "c.csv"}))
    assert main(["spectrum", "--config", str(cfg)]) == 0
    assert len(read_csv(tmp_path / "c.csv")) == 4
    # explicit flag wins over the file value
    assert main(["spectrum", "--config", str(cfg), "--n-states", "2",
                 "--output", "d.csv"]) == 0
    assert len(read_csv(tmp_path / "d.csv")) == 2


def test_config_unknown_key_is_line_referenced(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    cfg = tmp_path / "bad.json"
    cfg.write_text('{\n  "zeta": 25,\n  "ewa": -10\n}\n')
    assert main(["spectrum", "--config", str(cfg)]) == 2
    err = capsys.readouterr().err
    assert "bad.json:3" in err
    assert "ewa" in err


def test_invalid_params_exit_one(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    assert main(["spectrum", "--zeta", "-4", "--eta", "-1"]) == 1
    assert "zeta" in capsys.readouterr().err


def test_crossings_output(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["crossings", "--zeta", "16", "--eta-range", "-6:-2:0.5",
                 "--pair", "1", "2", "--resolution", "41",
                 "--output", "x.csv"]) == 0
    rows = read_csv(tmp_path / "x.csv")
    assert len(rows) == 1
    assert rows[0]["kind"] == "genuine"
    assert float(rows[0]["eta_cross"]) == pytest.approx(-4.0, abs=1e-5)


def test_switch_on_populations_match_library(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["switch-on", "--zeta", "25", "--eta", "-10", "--j0", "1",
                 "--n-states", "6", "--output", "on.csv"]) == 0
    rows = read_csv(tmp_path / "on.csv")
    spec = solve_spectrum(InteractionParams(-10.0, 25.0), 6)
    pops = switch_on_populations(spec, 1)
    for row, rec in zip(rows, pops):
        assert float(row["probability"]) == pytest.approx(rec.probability,
                                                          abs=1e-12)


def test_switch_off_series_file(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["switch-off", "--zeta", "25", "--eta", "-5", "--n0", "0",
                 "--tau-max", "6.2832", "--output", "off.csv"]) == 0
    series = read_csv(tmp_path / "off_series.csv")
    assert float(series[0]["tau"]) == 0.0
    j2 = np.array([float(r["J2"]) for r in series])
    assert j2.max() - j2.min() < 1e-10
    manifest = json.loads((tmp_path / "off.manifest.json").read_text())
    listed = {o["path"] for o in manifest["outputs"]}
    assert listed == {"off.csv", "off_series.csv"}


def test_propagate_flags(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["propagate", "--j0", "0", "--eta-to", "-10",
                 "--zeta-to", "25", "--ramp-duration", "0.1",
                 "--hold-duration", "0.2", "--dtau", "1e-3",
                 "--output", "p.csv"]) == 0
    rows = read_csv(tmp_path / "p.csv")
    assert float(rows[0]["tau"]) == 0.0
    assert float(rows[-1]["tau"]) == pytest.approx(0.3, abs=1e-9)
    assert float(rows[-1]["eta"]) == -10.0
    for r in rows:
        assert abs(float(r["norm"]) - 1.0) < 1e-9


def test_propagate_schedule_config(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg = tmp_path / "sched.json"
    cfg.write_text(json.dumps({
        "command": "propagate", "j0": 0, "dtau": 1e-3, "output": "sp.csv",
        "schedule": {"segments": [
            {"duration": 0.25,
             "eta": {"profile": "linear", "from": 0, "to": -7},
             "zeta": {"profile": "constant", "value": 25}},
        ]},
    }))
    assert main(["propagate", "--config", str(cfg)]) == 0
    rows = read_csv(tmp_path / "sp.csv")
    assert float(rows[0]["zeta"]) == 25.0
    assert float(rows[-1]["eta"]) == pytest.approx(-7.0)


def test_propagate_needs_a_schedule(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    assert main(["propagate", "--j0", "0"]) == 2
    assert "schedule" in capsys.readouterr().err


def test_topology_map_resolution_floor(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    assert main(["topology-map", "--eta-range", "-10:0:1",
                 "--zeta-range", "5:40:1"]) == 2
    assert "16" in capsys.readouterr().err


def test_topology_map_outputs_and_env_threads(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    argv = ["topology-map", "--eta-range", "-32:-2:2", "--zeta-range",
            "5:35:2", "--tau-tilde", "12.566", "--n-states", "8",
            "--j-max", "32"]
    monkeypatch.setenv("PLANAR_PENDULUM_THREADS", "2")
    assert main(argv + ["--output", "t1.csv"]) == 0
    monkeypatch.delenv("PLANAR_PENDULUM_THREADS")
    assert main(argv + ["--output", "t2.csv", "--threads", "1"]) == 0
    assert (tmp_path / "t1.csv").read_bytes() == (tmp_path / "t2.csv").read_bytes()
    overlays = json.loads((tmp_path / "t1_overlays.json").read_text())
    assert "2" in overlays["kappa_loci"]
    assert overlays["kappa_loci"]["3"]["parity"] == "odd"
    boundary = overlays["well_boundary"]
    assert boundary["eta"][0] == pytest.approx(-2.0 * boundary["zeta"][0])


def test_json_format(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["spectrum", "--zeta", "25", "--eta", "-10",
                 "--n-states", "2", "--format", "json",
                 "--output", "s.json"]) == 0
    body = json.loads((tmp_path / "s.json").read_text())
    assert body["columns"][:2] == ["eta", "zeta"]
    assert body["rows"][0][2] == 0          # state index stays an integer
    assert isinstance(body["rows"][0][4], float)


def test_validate_subset(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    assert main(["validate", "--checks",
                 "free-rotor-spectrum,potential-topology"]) == 0
    out = capsys.readouterr().out
    assert out.count("[PASS]") == 2
    assert "2/2" in out


def test_negative_values_after_flags(tmp_path, monkeypatch):
    # argparse alone would treat "-10:-8:1" as an option string
    monkeypatch.chdir(tmp_path)
    assert main(["spectrum", "--eta-range", "-10:-8:1", "--zeta", "25",
                 "--n-states", "1", "--output", "neg.csv"]) == 0
    assert len(read_csv(tmp_path / "neg.csv")) == 3
