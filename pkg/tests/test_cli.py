import json

import pytest

from circuitann.cli import main

from cli_helpers import SMALL_CONFIG, pipeline, run, snapshot, write_inputs


@pytest.fixture
def config(tmp_path):
    p = tmp_path / "small.ini"
    p.write_text(SMALL_CONFIG)
    return p


def test_full_pipeline(tmp_path, config):
    write_inputs(tmp_path / "inputs.csv")
    out = tmp_path / "a"
    assert pipeline(out, config) == [0] * 6
    files = snapshot(out)
    for name in ["dataset.csv", "context.json", "weights.json", "train_report.json",
                 "report.csv", "report.json", "report.md", "predictions.csv", "sweep.csv"]:
        assert name in files
    assert json.loads(files["weights.json"])["cycles_completed"] == 33
    assert json.loads(files["train_report.json"])["start_cycle"] == 30
    assert files["predictions.csv"].decode().splitlines()[0] == "XL,XC,R,E,i_pred,phi_pred"
    assert json.loads(files["context.json"])["seed"] == 5


def test_pipeline_byte_identical(tmp_path, config):
    write_inputs(tmp_path / "inputs.csv")
    pipeline(tmp_path / "a", config)
    pipeline(tmp_path / "b", config)
    assert snapshot(tmp_path / "a") == snapshot(tmp_path / "b")


def test_seed_changes_output(tmp_path, config):
    run(["gen", "--class", "1a", "--seed", "1"], tmp_path / "a", config)
    run(["gen", "--class", "1a", "--seed", "2"], tmp_path / "b", config)
    assert snapshot(tmp_path / "a")["dataset.csv"] != snapshot(tmp_path / "b")["dataset.csv"]


def test_gen_count(tmp_path):
    assert run(["gen", "--class", "1b", "--count", "7"], tmp_path) == 0
    assert len((tmp_path / "dataset.csv").read_text().splitlines()) == 8


def test_run_and_ohm(tmp_path, config, capsys):
    assert run(["run", "--class", "1a"], tmp_path / "r", config) == 0
    assert "nrmse=" in capsys.readouterr().out
    assert run(["ohm", "--seed", "0"], tmp_path / "o") == 0
    doc = json.loads((tmp_path / "o" / "report.json").read_text())
    assert doc["passed"] is True


def test_amp_writes_both(tmp_path, config):
    assert run(["amp"], tmp_path, config) == 0
    assert (tmp_path / "amp_electrical" / "report.json").exists()
    assert (tmp_path / "amp_electronic" / "report.json").exists()


def test_missing_dataset(tmp_path, capsys):
    assert run(["train"], tmp_path) == 2
    assert "context.json" in capsys.readouterr().err


def test_corrupt_dataset(tmp_path, capsys):
    run(["gen", "--class", "1a", "--count", "5"], tmp_path)
    p = tmp_path / "dataset.csv"
    lines = p.read_text().splitlines()
    lines[2] = "1,2"
    p.write_text("\n".join(lines) + "\n")
    assert run(["train"], tmp_path) == 2
    assert "row 3" in capsys.readouterr().err


def test_sweep_cap_error(tmp_path, config, capsys):
    run(["gen", "--class", "1a", "--count", "10"], tmp_path, config)
    run(["train"], tmp_path, config)
    code = run(["sweep", "--grid", "R=1:100:0.01", "--grid", "V=1:20:0.01", "--current-band", "1:2",
                "--cap", "10"], tmp_path, config)
    assert code == 2
    assert "coarser" in capsys.readouterr().err


def test_sweep_empty_band(tmp_path, config):
    run(["gen", "--class", "1a", "--count", "10"], tmp_path, config)
    run(["train"], tmp_path, config)
    code = run(["sweep", "--grid", "R=5:10:1", "--grid", "V=10", "--current-band", "50:60"], tmp_path, config)
    assert code == 0
    assert (tmp_path / "sweep.csv").read_text() == "R,V,i_pred,distance\n"


@pytest.mark.parametrize("bad", [["--current-band", "oops"], ["--grid", "R5"], ["--grid", "Q=1", "--grid", "R=1"]])
def test_sweep_bad_arguments(tmp_path, config, bad, capsys):
    run(["gen", "--class", "1a", "--count", "10"], tmp_path, config)
    run(["train"], tmp_path, config)
    args = ["sweep", "--grid", "V=10", "--current-band", "1:2"] + bad
    assert run(args, tmp_path, config) == 2
    assert "error" in capsys.readouterr().err


def test_predict_missing_column(tmp_path, config, capsys):
    run(["gen", "--class", "1a", "--count", "10"], tmp_path, config)
    run(["train"], tmp_path, config)
    (tmp_path / "in.csv").write_text("R\n5\n")
    assert run(["predict", "--input", str(tmp_path / "in.csv")], tmp_path, config) == 2
    assert "missing columns" in capsys.readouterr().err


def test_bad_config(tmp_path, capsys):
    p = tmp_path / "c.ini"
    p.write_text("[nope]\n")
    assert run(["gen", "--class", "1a"], tmp_path, p) == 2


def test_usage_errors():
    with pytest.raises(SystemExit):
        main([])
    with pytest.raises(SystemExit):
        main(["gen", "--class", "9z"])
