import csv
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from d2chain import cli
from d2chain import thermo as th

HERM = {"s": [0.6, [0.3, 0.4], -0.9, 0.2, 0.7], "t": [-0.8, [0.4, -0.5], -1.1, -0.3, 0.5]}


def write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


def config(prefix, **sections):
    out = {"output": {"dir": "out", "prefix": prefix, "timings": False}}
    out.update(sections)
    return out


def record(tmp_path, prefix):
    return json.loads((tmp_path / "out" / f"{prefix}_record.json").read_text())


def rows(tmp_path, name):
    with open(tmp_path / "out" / name, newline="") as fh:
        return list(csv.reader(fh))


@pytest.fixture(autouse=True)
def in_tmp(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)


@pytest.mark.parametrize("bad", [
    {"model": {"kind": "d2", "n": 2, "eta": 0.7}, "boundary": {"hermitian": HERM, "raw": {"s": [1] * 6}}},
    {"model": {"kind": "xyz", "n": 2, "eta": 0.7}, "boundary": {"hermitian": HERM}},
    {"model": {"kind": "d2", "n": 2}, "boundary": {"hermitian": HERM}},
    {"model": {"kind": "d2", "n": 2, "eta": 0.7}, "boundary": {"hermitian": HERM}, "extra": {}},
    {"model": {"kind": "xxz", "n": 2, "eta": 0.7}},
])
def test_config_errors_exit_2(tmp_path, bad):
    assert cli.main(["verify", write(tmp_path, "bad.json", bad)]) == cli.EXIT_CONFIG


def test_missing_and_malformed_files_exit_2(tmp_path):
    assert cli.main(["thermo", str(tmp_path / "nope.json")]) == cli.EXIT_CONFIG
    p = tmp_path / "broken.json"
    p.write_text("{model: ")
    assert cli.main(["thermo", str(p)]) == cli.EXIT_CONFIG


def test_verify_passes_and_negative_control_fails(tmp_path, capsys):
    good = config("good", model={"kind": "d2", "n": 2, "eta": 0.7}, boundary={"hermitian": HERM},
                  solver={"seed": 3, "draws": 1})
    assert cli.main(["verify", write(tmp_path, "good.json", good)]) == cli.EXIT_OK
    rec = record(tmp_path, "good")
    assert rec["status"] == "ok" and rec["residuals"]["max_counted"] < 1e-9
    assert not rec["outputs"]["failed"]
    bad = dict(good, solver={"seed": 3, "draws": 1, "corrupt_eta": 0.01})
    bad["output"] = dict(good["output"], prefix="bad")
    capsys.readouterr()
    assert cli.main(["verify", write(tmp_path, "bad.json", bad)]) == cli.EXIT_FAIL
    assert "factorization_r" in capsys.readouterr().err
    assert record(tmp_path, "bad")["status"] != "ok"


def test_verify_rational_reduced(tmp_path):
    cfg = config("x", model={"kind": "xxx", "n": 2}, boundary={"pqxi": [1.0, -1.0, 0.3]})
    assert cli.main(["verify", write(tmp_path, "x.json", cfg)]) == cli.EXIT_OK


def test_spectrum_d2_full(tmp_path):
    cfg = config("sp", model={"kind": "d2", "n": 2, "eta": 0.7}, boundary={"hermitian": HERM},
                 solver={"roots": True})
    assert cli.main(["spectrum", write(tmp_path, "sp.json", cfg)]) == cli.EXIT_OK
    table = rows(tmp_path, "sp_spectrum.csv")
    assert table[0] == ["index", "value"] and len(table) == 17
    vals = np.array([float(r[1]) for r in table[1:]])
    assert np.all(np.diff(vals) >= 0)
    # %.17g round-trips doubles exactly
    assert all(float("%.17g" % v) == v for v in vals)
    assert os.path.exists(tmp_path / "out" / "sp_roots.csv")


def test_roots_zero_root_solver(tmp_path):
    cfg = config("ro", model={"kind": "xxz", "n": 4, "eta": 0.9},
                 boundary={"hermitian": {"s": HERM["s"]}}, solver={"backend": "zero_root_solver"})
    assert cli.main(["roots", write(tmp_path, "ro.json", cfg)]) == cli.EXIT_OK
    table = rows(tmp_path, "ro_roots.csv")
    assert table[0][:3] == ["sector", "re_z", "im_z"] and len(table) == 1 + 2 * 4 + 4


def test_thermo_bit_for_bit_and_deterministic(tmp_path):
    cfg = config("th", model={"kind": "xxx"}, boundary={"pqxi": [1.0, -1.0, 0.3]})
    path = write(tmp_path, "th.json", cfg)
    assert cli.main(["thermo", path]) == cli.EXIT_OK
    first = (tmp_path / "out" / "th_record.json").read_text()
    assert json.loads(first)["outputs"]["surface_energy"] == th.surface_energy_xxx(1.0, -1.0, 0.3).value
    assert cli.main(["thermo", path]) == cli.EXIT_OK
    assert (tmp_path / "out" / "th_record.json").read_text() == first


def test_thermo_regime_warning_recorded(tmp_path, capsys):
    cfg = config("tw", model={"kind": "xxx"}, boundary={"pqxi": [0.2, -1.0, 0.3]})
    cli.main(["thermo", write(tmp_path, "tw.json", cfg)])
    assert record(tmp_path, "tw")["messages"]
    assert "p = 0.2" in capsys.readouterr().err


def test_config_echo_reproduces_outputs(tmp_path):
    cfg = config("e1", model={"kind": "d2", "eta": 1.2}, boundary={"hermitian": HERM})
    assert cli.main(["thermo", write(tmp_path, "e1.json", cfg), "--seed", "5"]) == cli.EXIT_OK
    rec = record(tmp_path, "e1")
    assert rec["config"]["solver"]["seed"] == 5
    echo = dict(rec["config"])
    echo["output"] = dict(echo["output"], prefix="e2")
    assert cli.main(["thermo", write(tmp_path, "e2.json", echo)]) == cli.EXIT_OK
    assert record(tmp_path, "e2")["outputs"] == rec["outputs"]


def test_scan_series(tmp_path):
    cfg = config("sc", model={"kind": "xxz", "eta": 0.8}, boundary={"hermitian": {"s": HERM["s"]}},
                 scan={"protocol": "series", "quantity": "surface_energy", "ns": [4, 5, 6, 7, 8],
                       "fit": "exponential"})
    assert cli.main(["scan", write(tmp_path, "sc.json", cfg)]) == cli.EXIT_OK
    data = rows(tmp_path, "sc_data.csv")
    assert len(data) == 6
    assert os.path.exists(tmp_path / "out" / "sc_fit.csv")
    assert record(tmp_path, "sc")["status"] == "ok"


def test_atomic_write_replaces(tmp_path):
    p = str(tmp_path / "sub" / "f.txt")
    cli.atomic_write(p, "one")
    cli.atomic_write(p, "two")
    assert open(p).read() == "two"
    assert os.listdir(tmp_path / "sub") == ["f.txt"]


def test_console_entry_point(tmp_path):
    cfg = config("ep", model={"kind": "xxx"}, boundary={"pqxi": [1.0, -1.0, 0.3]})
    path = write(tmp_path, "ep.json", cfg)
    res = subprocess.run([sys.executable, "-m", "d2chain.cli", "thermo", path], cwd=tmp_path,
                         capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert "thermo: ok" in res.stdout
