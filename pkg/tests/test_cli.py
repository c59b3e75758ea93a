"""End-to-end tests for the batch command-line interface."""

import csv
import json
import math
import os

import pytest

from modzero.cli import _parse_weights, main


def run_cli(args):
    return main(args)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_parse_weights_spec():
    assert _parse_weights("12") == [12]
    assert _parse_weights("12,16") == [12, 16]
    assert _parse_weights("12:20") == [12, 14, 16, 18, 20]
    assert _parse_weights("12:24:4") == [12, 16, 20, 24]
    assert _parse_weights("16,12:16") == [12, 14, 16]


def test_forms_command(tmp_path):
    out = str(tmp_path / "o")
    os.makedirs(out)
    assert run_cli(["forms", "--weights", "12", "--out", out]) == 0
    with open(os.path.join(out, "forms", "k12_eis.json")) as fh:
        eis = json.load(fh)
    assert eis["schema"] == "modzero/1"
    assert eis["weight"] == 12 and eis["kind"] == "eisenstein"
    with open(os.path.join(out, "forms", "k12_eig0.json")) as fh:
        eig = json.load(fh)
    assert eig["kind"] == "eigenform"
    assert float(eig["coeffs"][2]) == -24.0
    with open(os.path.join(out, "manifest_forms.json")) as fh:
        man = json.load(fh)
    assert man["schema"] == "modzero/1"
    assert len(man["config_hash"]) == 16
    assert sorted(man["files"]) == ["forms/k12_eig0.json", "forms/k12_eis.json"]


def test_zeros_command_and_schema(tmp_path):
    out = str(tmp_path / "o")
    os.makedirs(out)
    assert run_cli(["zeros", "--weights", "12,14", "--out", out]) == 0
    rows = read_csv(os.path.join(out, "zeros.csv"))
    assert all(r["schema"] == "modzero/1" for r in rows)
    assert all(r["status"] == "ok" for r in rows)
    # E12 zero lies on the unit arc; Delta contributes no rows
    e12 = [r for r in rows if r["k"] == "12" and r["kind"] == "eisenstein"]
    assert len(e12) == 1
    assert abs(float(e12[0]["abs_z"]) - 1.0) < 1e-8
    assert not any(r["kind"] == "eigenform" and r["k"] == "12" for r in rows)


def test_zeros_deterministic_across_jobs(tmp_path):
    out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
    os.makedirs(out1), os.makedirs(out2)
    assert run_cli(["zeros", "--weights", "12:16", "--out", out1, "--jobs", "1"]) == 0
    assert run_cli(["zeros", "--weights", "12:16", "--out", out2, "--jobs", "2"]) == 0
    with open(os.path.join(out1, "zeros.csv")) as fh:
        a = fh.read()
    with open(os.path.join(out2, "zeros.csv")) as fh:
        b = fh.read()
    assert a == b


def test_measures_command(tmp_path):
    out = str(tmp_path / "o")
    os.makedirs(out)
    assert run_cli(["measures", "--weights", "24", "--kinds", "eisenstein",
                    "--grid", "3x3", "--out", out]) == 0
    rows = read_csv(os.path.join(out, "measures.csv"))
    assert rows and all(r["schema"] == "modzero/1" for r in rows)
    emps = [float(r["empirical"]) for r in rows if r["status"] == "ok"]
    vols = [float(r["volume"]) for r in rows if r["status"] == "ok"]
    assert sum(emps) == pytest.approx(1.0, abs=1e-12)
    assert sum(vols) == pytest.approx(1.0, abs=1e-9)
    with open(os.path.join(out, "measures_summary.json")) as fh:
        summary = json.load(fh)
    assert summary["schema"] == "modzero/1"
    assert "k24_eisenstein-1" in summary["sup_diff"]


def test_gamma_command(tmp_path):
    out = str(tmp_path / "o")
    os.makedirs(out)
    assert run_cli(["gamma", "--weights", "100,1000", "--out", out]) == 0
    rows = read_csv(os.path.join(out, "gamma.csv"))
    assert len(rows) == 2
    for r in rows:
        k = int(r["k"])
        assert abs(float(r["ratio"]) - 0.5) <= 1.0 / math.sqrt(k)
        assert 1.0 / 3.0 < float(r["theta"]) < 0.5


def test_potential_command(tmp_path):
    out = str(tmp_path / "o")
    os.makedirs(out)
    assert run_cli(["potential", "--weights", "12", "--kinds", "eigenform",
                    "--eps", "1e-4", "--out", out]) == 0
    with open(os.path.join(out, "potential.json")) as fh:
        data = json.load(fh)
    assert data["schema"] == "modzero/1"
    chk = data["checks"][0]
    assert chk["diff"] <= 1e-3 * (1.0 + abs(chk["lhs"]) + abs(chk["rhs"]))


def test_supnorm_command(tmp_path):
    out = str(tmp_path / "o")
    os.makedirs(out)
    assert run_cli(["supnorm", "--weights", "12:16", "--out", out]) == 0
    rows = read_csv(os.path.join(out, "supnorm.csv"))
    assert [r["k"] for r in rows] == ["12", "16"]
    for r in rows:
        assert float(r["sup_log"]) <= float(r["bound_log"]) + 1e-9
    with open(os.path.join(out, "supnorm_summary.json")) as fh:
        summary = json.load(fh)
    assert "slope" in summary


def test_invalid_arguments_exit_nonzero(tmp_path):
    out = str(tmp_path / "o")
    os.makedirs(out)
    assert run_cli(["zeros", "--weights", "13", "--out", out]) == 1
    assert run_cli(["zeros", "--weights", "12", "--eps", "5", "--out", out]) == 1
    assert run_cli(["zeros", "--weights", "12", "--jobs", "0", "--out", out]) == 1


def test_env_defaults(tmp_path, monkeypatch):
    out = str(tmp_path / "o")
    os.makedirs(out)
    monkeypatch.setenv("MODZ_WEIGHTS", "14")
    monkeypatch.setenv("MODZ_OUT", out)
    assert run_cli(["zeros"]) == 0
    rows = read_csv(os.path.join(out, "zeros.csv"))
    assert {r["k"] for r in rows} == {"14"}


def test_config_hash_stable_across_out_and_jobs(tmp_path):
    out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
    os.makedirs(out1), os.makedirs(out2)
    run_cli(["zeros", "--weights", "12", "--out", out1, "--jobs", "1"])
    run_cli(["zeros", "--weights", "12", "--out", out2, "--jobs", "2"])
    with open(os.path.join(out1, "manifest_zeros.json")) as fh:
        h1 = json.load(fh)["config_hash"]
    with open(os.path.join(out2, "manifest_zeros.json")) as fh:
        h2 = json.load(fh)["config_hash"]
    assert h1 == h2
