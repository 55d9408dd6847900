import numpy as np

from paramsens.cli import main
from paramsens.fibers import read_fiber_csv
from paramsens.report import write_report
from paramsens.sampling import read_plan_csv


def test_sample_command(tmp_path, capsys):
    params = tmp_path / "params.ini"
    params.write_text("[parameters]\na = 0, 1\nb = 0, 1\n")
    out = tmp_path / "plan.csv"
    rc = main([
        "sample", "--params", str(params), "--n", "3", "--step", "0.25",
        "--seed", "5", "--out", str(out),
    ])
    assert rc == 0
    plan = read_plan_csv(out)
    assert plan.star_count == 3
    assert plan.seed == 5
    assert "samples" in capsys.readouterr().out


def test_synth_command_deterministic(tmp_path):
    args = [
        "synth", "--param1", "0.5", "--param2", "0.5", "--seed", "3",
        "--count", "5", "--extent", "300,300,300",
    ]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    result = read_fiber_csv(a)
    assert len(result.fibers) == 5


def test_analyze_writes_sensitivity_csv(small_collection):
    rc = main(["analyze", "--collection", str(small_collection), "--stages", "sensitivity"])
    assert rc == 0
    csv = (small_collection / "sensitivity.csv").read_text().splitlines()
    assert csv[0] == "parameter,measure,entry,value"
    assert any(",GLOBAL," in line for line in csv)
    assert any(line.split(",")[2].isdigit() for line in csv[1:])  # local rows
    # regional rows carry a float bin center in the entry column
    assert any("." in line.split(",")[2] for line in csv[1:])


def test_report_outputs(small_study, tmp_path):
    out = write_report(small_study, tmp_path / "report")
    assert (out / "matrix.csv").exists()
    assert (out / "sensitivity.csv").exists()
    assert (out / "embedding.csv").exists()
    assert (out / "occupation.raw").exists()
    assert (out / "occupation.hdr").exists()
    assert "in-out matrix" in (out / "summary.txt").read_text()
    header = (out / "matrix.csv").read_text().splitlines()[0]
    assert header.startswith("parameter,StraightLength")


def test_missing_config_error(tmp_path):
    rc = main(["run", "--config", str(tmp_path / "none.ini"), "--out", str(tmp_path / "x")])
    assert rc == 2
