import csv
import json
import math

import pytest

from reduced_measures import cli

DISK = {"kind": "radialN", "h": 2.0**-7, "dim": 2, "radius": 1.0}


def _write(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def _reduce_config(tmp_path, weight=8 * math.pi):
    return _write(
        tmp_path,
        "reduce.json",
        {
            "grid": DISK,
            "nonlinearity": {"kind": "exp"},
            "measure": {"atoms": [{"at": 0.0, "weight": weight}]},
            "scheme": "truncation",
        },
    )


def test_solve_writes_solution_and_diagnostics(tmp_path):
    cfg = _write(
        tmp_path,
        "solve.json",
        {
            "grid": {"kind": "interval1d", "h": 2.0**-6, "length": 1.0},
            "nonlinearity": {"kind": "power", "p": 2.0},
            "measure": {"density": {"kind": "constant", "value": 3.0}},
        },
    )
    out = tmp_path / "out"
    assert cli.main(["solve", "--config", cfg, "--out", str(out)]) == cli.EXIT_OK

    diag = json.loads((out / "solve_diagnostics.json").read_text())
    assert diag["converged"] is True
    assert diag["residual_l1"] <= 1e-6

    with open(out / "solution.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["x", "u"]
    assert len(rows) == 64  # header + one row per node


def test_reduce_reports_the_clamped_atom(tmp_path):
    cfg = _reduce_config(tmp_path)
    out = tmp_path / "out"
    assert cli.main(["reduce", "--config", cfg, "--out", str(out)]) == cli.EXIT_OK

    reduced = json.loads((out / "reduced.json").read_text())
    assert reduced["scheme"] == "truncation"
    assert reduced["converged"] is True
    # calibration accuracy is covered by the reduction tests at finer h;
    # here we only require the structural clamp below the critical mass
    ((atom),) = reduced["mu_star"]["atoms"]
    assert 0.6 * 4 * math.pi <= atom["weight"] <= 4 * math.pi * (1 + 1e-9)
    assert reduced["defect_tv"] == pytest.approx(8 * math.pi - atom["weight"])

    with open(out / "levels.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][0] == "n"
    assert len(rows) > 2


def test_reduce_output_is_byte_deterministic(tmp_path):
    cfg = _reduce_config(tmp_path)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert cli.main(["reduce", "--config", cfg, "--out", str(out1)]) == 0
    assert cli.main(["reduce", "--config", cfg, "--out", str(out2)]) == 0
    for name in ("reduced.json", "levels.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_config_errors_exit_with_code_two(tmp_path, capsys):
    bad = _write(tmp_path, "bad.json", {"grid": {"kind": "hex", "h": 0.1},
                                        "nonlinearity": {"kind": "exp"},
                                        "measure": {}})
    assert cli.main(["reduce", "--config", bad]) == cli.EXIT_CONFIG
    assert "config error" in capsys.readouterr().err

    assert cli.main(["reduce", "--config", str(tmp_path / "nope.json")]) == cli.EXIT_CONFIG


def test_capacity_closed_forms_in_csv(tmp_path):
    cfg = _write(
        tmp_path,
        "capacity.json",
        {
            "grid": {"kind": "radialN", "h": 2.0**-8, "dim": 2, "radius": 1.0},
            "delta": 0.02,
            "sets": [
                {"kind": "ball", "center": 0.0, "radius": 0.25, "tag": "disk"},
                {"kind": "point", "at": 0.0, "tag": "origin"},
            ],
        },
    )
    out = tmp_path / "out"
    assert cli.main(["capacity", "--config", cfg, "--out", str(out)]) == cli.EXIT_OK
    with open(out / "capacity.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    by_tag = {r["set"]: r for r in rows}
    disk_cap = float(by_tag["disk"]["cap_h1"])
    assert disk_cap == pytest.approx(2 * math.pi / math.log(4.0), rel=1e-3)
    assert float(by_tag["disk"]["ratio"]) == pytest.approx(2.0 / 0.98, rel=1e-3)
    assert float(by_tag["origin"]["cap_h1"]) < disk_cap


def test_sweep_continues_past_failing_rows(tmp_path):
    cfg = _write(
        tmp_path,
        "sweep.json",
        {
            "base": {
                "grid": DISK,
                "nonlinearity": {"kind": "exp"},
                "measure": {"atoms": [{"at": 0.0, "weight": 2.0}]},
                "scheme": "truncation",
            },
            "sweep": {"parameter": "h", "values": [2.0**-6, -1.0, 2.0**-7]},
        },
    )
    out = tmp_path / "out"
    assert cli.main(["sweep", "--config", cfg, "--out", str(out)]) == cli.EXIT_OK
    with open(out / "sweep.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 3
    values = [float(r["value"]) for r in rows]
    assert values == sorted(values)  # deterministic ordering
    status = {float(r["value"]): r["status"] for r in rows}
    assert status[-1.0].startswith("failed")
    assert status[2.0**-6] == "ok" and status[2.0**-7] == "ok"


def test_sweep_is_deterministic_across_thread_counts(tmp_path):
    payload = {
        "base": {
            "grid": DISK,
            "nonlinearity": {"kind": "exp"},
            "measure": {"atoms": [{"at": 0.0, "weight": 20.0}]},
            "scheme": "truncation",
        },
        "sweep": {"parameter": "atom_mass", "values": [2.0, 20.0, 40.0]},
    }
    cfg = _write(tmp_path, "sweep.json", payload)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert cli.main(["sweep", "--config", cfg, "--out", str(out1), "--threads", "1"]) == 0
    assert cli.main(["sweep", "--config", cfg, "--out", str(out2), "--threads", "3"]) == 0
    assert (out1 / "sweep.csv").read_bytes() == (out2 / "sweep.csv").read_bytes()
    # wall-clock timings live in a separate file, outside the determinism contract
    assert (out1 / "timings.csv").exists()


def test_verify_subcommand_writes_a_report(tmp_path):
    out = tmp_path / "out"
    assert cli.main(["verify", "calculus", "--out", str(out)]) == cli.EXIT_OK
    report = json.loads((out / "verify_report.json").read_text())
    assert report["suite"] == "calculus"
    assert report["passed"] is True
    assert all(r["passed"] for r in report["results"])


def test_unknown_suite_is_rejected_by_the_parser():
    with pytest.raises(SystemExit):
        cli.main(["verify", "quantum"])
