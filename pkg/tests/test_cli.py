import json

import pytest

from dswave import cli
from dswave.cli import cli_main
from dswave.serialize import read_series, read_snapshot


def config(tmp_path, doc):
    p = tmp_path / "c.json"
    p.write_text(json.dumps(doc))
    return str(p)


def stderr_record(capsys):
    err = capsys.readouterr().err.strip().splitlines()
    return json.loads(err[-1])


def test_run_zero_data(tmp_path, capsys):
    c = config(tmp_path, {"data": {"eps": 0.0}, "control": {"t_end": 0.5, "snapshot_stride": 10}})
    out = tmp_path / "out"
    assert cli_main(["run", "--config", c, "--out", str(out)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["status"] == "Completed" and summary["final_time"] == 0.5
    header, data = read_series(out / "series.csv")
    assert data.shape[0] == summary["steps"] + 1
    assert not data[:, header.index("F")].any()
    snap = read_snapshot(out / "snapshot_00000.bin")
    assert snap.t == 0.0 and not snap.phi.any()
    assert json.loads((out / "config.json").read_text())["data"]["eps"] == 0.0


def test_run_fail_on_blowup(tmp_path, capsys):
    c = config(tmp_path, {
        "equation": {"variant": "GeneralizedExtremal", "alpha": 1.0},
        "data": {"eps": 3.5}, "grid": {"points": 33}, "control": {"t_end": 0.2},
        "output": {"snapshots": False},
    })
    args = ["run", "--config", c, "--out", str(tmp_path / "o")]
    assert cli_main(args) == 0
    assert json.loads(capsys.readouterr().out)["criterion"] == "DenominatorDegenerate"
    assert cli_main(args + ["--fail-on-blowup"]) == 2


def test_invalid_config_exit_one(tmp_path, capsys):
    c = config(tmp_path, {"equation": {"variant": "GeneralizedExtremal", "alpha": 1.5},
                          "grid": {"extent": 4.0}, "data": {"f": {"radius": 3.0}}})
    assert cli_main(["run", "--config", c]) == 1
    rec = stderr_record(capsys)
    assert rec["error"] == "config" and len(rec["problems"]) == 2


def test_unknown_flag_prints_usage(capsys):
    assert cli_main(["run", "--bogus"]) == 1
    err = capsys.readouterr().err
    assert "usage:" in err
    assert json.loads(err.strip().splitlines()[-1])["error"] == "usage"
    assert cli_main([]) == 1
    assert cli_main(["explode"]) == 1


def test_sweep_pipeline(capsys):
    assert cli_main(["sweep", "--alpha", "1", "--eps", "0.4,0.2,0.1", "--t-end", "0.5", "--points", "65"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "# schema_version: 1"
    assert out[1].startswith("eps,alpha,lifespan_estimate,censored")
    assert len([line for line in out if line and line[0].isdigit()]) == 3
    summary = json.loads(out[-1][2:])
    assert summary["all_censored"] and summary["fit"] is None and summary["lower_bound_ok"]


def test_oracle_riccati(capsys):
    assert cli_main(["oracle", "--case", "riccati"]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["t_star"] == pytest.approx(0.924196, abs=1e-6)
    assert rec["pde_criterion"] == "AmplitudeThreshold" and rec["relative_difference"] < 0.02


def test_oracle_linear(capsys):
    assert cli_main(["oracle", "--case", "linear"]) == 0
    assert json.loads(capsys.readouterr().out)["relative_error"] < 1e-8


def test_converge_zero_data(tmp_path, capsys):
    c = config(tmp_path, {"data": {"eps": 0.0}, "grid": {"points": 33}, "control": {"t_end": 0.2}})
    assert cli_main(["converge", "--config", c]) == 0
    summary = json.loads(capsys.readouterr().out.splitlines()[-1][2:])
    assert summary["degenerate"] and summary["orders"] == []


def test_converge_refusal_exit(tmp_path, capsys):
    c = config(tmp_path, {"equation": {"variant": "GeneralizedExtremal", "alpha": 1.0},
                          "data": {"eps": 3.5}, "grid": {"points": 33}, "control": {"t_end": 0.2}})
    assert cli_main(["converge", "--config", c]) == 1
    assert stderr_record(capsys)["error"] == "refused"


def test_crosscheck_command(capsys):
    assert cli_main(["crosscheck", "--points", "65,129", "--t-c", "1.0"]) == 0
    summary = json.loads(capsys.readouterr().out.splitlines()[-1][2:])
    assert len(summary["orders"]) == 1 and summary["orders"][0] > 1.7


def test_internal_error_exit_three(monkeypatch, capsys):
    def boom(args):
        raise RuntimeError("kaput")

    monkeypatch.setitem(cli._COMMANDS, "oracle", boom)
    assert cli_main(["oracle", "--case", "linear"]) == 3
    rec = stderr_record(capsys)
    assert rec["error"] == "internal" and "kaput" in rec["message"]
