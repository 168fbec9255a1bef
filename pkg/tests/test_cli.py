import json

import pytest

from walklim import cli


def run(argv):
    return cli.main(argv)


def test_missing_params_is_config_error(capsys):
    assert run(["verify", "--seed", "1"]) == cli.EXIT_CONFIG
    assert "error:" in capsys.readouterr().err


def test_missing_seed_is_config_error(capsys):
    assert run(["verify", "--q", "0.6"]) == cli.EXIT_CONFIG


def test_bad_q_is_config_error(capsys):
    assert run(["converge", "--q", "0.9"]) == cli.EXIT_CONFIG


def test_params_file_round_trip(tmp_path, capsys):
    f = tmp_path / "params.cfg"
    f.write_text("# comment\nL = 2\np1 = 0.2\np2 = 0.2\nq = 0.6\n")
    code = run(["converge", "--params-file", str(f), "--N", "10,100"])
    assert code == cli.EXIT_OK
    out = capsys.readouterr().out
    assert out.splitlines()[-2].startswith("10,")


def test_converge_csv_and_exit(capsys):
    code = run(["converge", "--q", "0.6", "--N", "10,100,1000"])
    assert code == cli.EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    header = [l for l in lines if l.startswith("N,")][0]
    assert header.split(",")[:6] == ["N", "x", "lambda", "F1", "F2", "Phi"]


def test_converge_statistical_failure():
    # a coarse schedule cannot reach a tiny threshold
    assert run(["converge", "--q", "0.6", "--N", "10,20",
                "--threshold", "1e-9"]) == cli.EXIT_STATISTICAL


def test_verify_json_output(tmp_path):
    out = tmp_path / "verify.json"
    code = run(["verify", "--q", "0.6", "--seed", "3", "--excursions", "5000",
                "--tv-threshold", "0.05",
                "--format", "json", "--out", str(out)])
    assert code == cli.EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["meta"]["seed"] == 3
    row = doc["rows"][0]
    assert row["identity_failures"] == 0
    assert row["excursions"] == 5000


def test_verify_reproducible(tmp_path):
    args = ["verify", "--q", "0.6", "--seed", "11", "--workers", "4",
            "--excursions", "4000", "--tv-threshold", "0.05"]
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    assert run(args + ["--out", str(a)]) == cli.EXIT_OK
    assert run(args + ["--out", str(b)]) == cli.EXIT_OK
    assert a.read_text() == b.read_text()


def test_compare_small_run(tmp_path):
    out = tmp_path / "cmp.csv"
    code = run(["compare", "--q", "0.6", "--seed", "5", "--N", "200",
                "--runs", "3000", "--paths", "3000", "--x", "0.5,1.0",
                "--out", str(out)])
    assert code == cli.EXIT_OK
    text = out.read_text()
    assert "ks," in text and "finite_dim_lt," in text


def test_moments_exit_and_columns(tmp_path):
    out = tmp_path / "m.csv"
    code = run(["moments", "--q", "0.6", "--seed", "42",
                "--n-schedule", "25,50,100,200", "--out", str(out)])
    assert code == cli.EXIT_OK
    header = [l for l in out.read_text().splitlines()
              if l.startswith("n,")][0]
    assert "exact" in header and "ratio" in header


def test_moments_bad_schedule():
    assert run(["moments", "--q", "0.6", "--seed", "1",
                "--n-schedule", "50"]) == cli.EXIT_CONFIG


def test_simulate_row_count(capsys):
    code = run(["simulate", "--q", "0.6", "--seed", "2", "--excursions", "7"])
    assert code == cli.EXIT_OK
    lines = [l for l in capsys.readouterr().out.splitlines()
             if not l.startswith("#")]
    assert lines[0] == "excursion_id,length,max_height"
    assert len(lines) == 8
