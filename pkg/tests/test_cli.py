import csv
import io
import json

import pytest

from ptfree.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_wg_table(capsys):
    code, out, _ = run(capsys, "wg", "--n", "2", "--N", "5")
    doc = json.loads(out)
    assert code == 0 and doc["schema_version"] == 1
    rows = {tuple(r["cycle_type"]): r["value"] for r in doc["rows"]}
    assert rows[(1, 1)] == "1/24" and rows[(2,)] == "-1/120"
    code, out, _ = run(capsys, "wg", "--n", "1", "--N", "7", "--format", "csv")
    body = [l for l in out.splitlines() if not l.startswith("#")]
    assert list(csv.reader(body))[1] == ["[1]", "1", "7", "1/7"]


def test_wg_singular(capsys):
    code, _, err = run(capsys, "wg", "--n", "3", "--N", "2")
    assert code == 2 and "N >= n" in err


def test_exact(capsys):
    code, out, _ = run(capsys, "exact", "--word", "A:G(1,2,2) A':G(1,2,2)", "--N", "4")
    doc = json.loads(out)
    assert code == 0 and doc["routes_agree"]
    assert {r["value"] for r in doc["rows"]} == {"1"}


def test_exact_errors(capsys):
    code, _, err = run(capsys, "exact", "--word", "A:G(1,2,3) A'", "--N", "4")
    assert code == 2 and "^" in err
    code, _, err = run(capsys, "exact", "--word", "A:I A:I' A:I A:I'", "--N", "50", "--budget", "1000")
    assert code == 3


def test_predict(capsys):
    code, out, _ = run(capsys, "predict", "--pattern", "uu*uu*", "--b", "2", "--model", "transpose")
    doc = json.loads(out)
    assert code == 0 and doc["rows"][0]["value"] == "7/4" and doc["rows"][0]["value_float"] == 1.75


def test_freeness(capsys):
    code, out, _ = run(
        capsys, "freeness", "--spec1", "t=1,b=2,d=N/2", "--spec2", "t=-1,b=2,d=N/2", "--grid", "8,16,32"
    )
    doc = json.loads(out)
    row = doc["rows"][0]
    assert code == 0 and row["predicted_free"] is True and doc["family_free"] is True
    vals = [n / d for _, n, d in row["fractions"]]
    assert vals == sorted(vals, reverse=True)


def test_freeness_bad_spec(capsys):
    code, _, err = run(capsys, "freeness", "--spec1", "t=1,b=2", "--spec2", "t=-1,b=2,d=N/2")
    assert code == 2 and "missing key" in err


def test_mc_and_config_round_trip(capsys, tmp_path):
    out_path = tmp_path / "mc.json"
    argv = ["mc", "--word", "U:G(1,2,2) U:G(1,2,2)'", "--N", "4", "--samples", "50", "--seed", "3", "--out", str(out_path)]
    assert main(argv) == 0
    first = json.loads(out_path.read_text())
    cfg = first["config"]
    again = ["mc", "--word", cfg["word"], "--N", str(cfg["N"]), "--samples", str(cfg["samples"]), "--seed", str(cfg["seed"])]
    code, out, _ = run(capsys, *again)
    assert json.loads(out)["rows"] == first["rows"]


def test_mc_expect_exit_codes(capsys):
    base = ["mc", "--word", "U:I U:I'", "--N", "3", "--samples", "20", "--seed", "1"]
    assert run(capsys, *base, "--expect", "1")[0] == 0
    assert run(capsys, *base, "--expect", "2")[0] == 1


def test_mc_csv_columns(capsys):
    code, out, _ = run(capsys, "mc", "--word", "U:G(1,2,2) U:G(1,2,2)'", "--N", "4", "--samples", "5", "--format", "csv")
    lines = out.splitlines()
    assert lines[0] == "# schema_version=1"
    header = next(l for l in lines if not l.startswith("#"))
    assert header == "word,N,b,d,n_samples,seed,mean_re,mean_im,std_error"


def test_reproduce_small(capsys):
    code, out, _ = run(capsys, "reproduce", "cor26")
    doc = json.loads(out)
    assert code == 0 and doc["passed"] is True
    code, out, _ = run(capsys, "reproduce", "thm16", "--d", "8", "--samples", "200", "--seed", "1")
    doc = json.loads(out)
    assert code == 0 and doc["config"]["resolved"]["d"] == 8


def test_reproduce_tolerance_failure(capsys):
    # a zero-width band cannot be met by a noisy estimate
    code, out, _ = run(capsys, "reproduce", "blocks", "--d", "4", "--samples", "50", "--band", "0")
    assert code == 1 and json.loads(out)["passed"] is False


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as info:
        main(["reproduce", "nonsense"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["wg", "--n", "0", "--N", "3"])
    assert info.value.code == 2
