import csv
import io
import json
import subprocess
import sys
from pathlib import Path
from fractions import Fraction

import pytest

from ktournament import parse_profile
from ktournament.cli import dispatch, encode, parse_range


@pytest.fixture
def files(tmp_path):
    p60 = tmp_path / "profile60.txt"
    p60.write_text("candidates: a,b\n0.6: a>b\n0.4: b>a\n")
    cyc = tmp_path / "cycle.txt"
    cyc.write_text("candidates: a,b,c\n1/3: a>b>c\n1/3: b>c>a\n1/3: c>a>b\n")
    return {"p60": str(p60), "cycle": str(cyc), "dir": tmp_path}


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = dispatch(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_distortion(files):
    code, out, _ = run("distortion", "--candidate", "b", files["p60"])
    rep = json.loads(out)
    assert code == 0 and rep["value"] == "4" and rep["witness_istar"] == "a"
    assert all(isinstance(x, str) for row in rep["metric"] for x in row)


def test_verify_lb5():
    code, out, _ = run("verify-paper", "--instance", "lb5")
    rep = json.loads(out)
    assert code == 0 and rep["pass"]
    assert sum(c["check"].endswith("distortion") for c in rep["checks"]) == 5


def test_verify_other_instances():
    assert run("verify-paper", "--instance", "theorem6-params")[0] == 0
    code, out, _ = run("verify-paper", "--instance", "cyclic", "--m", "3", "--trials", "2", "--format", "table")
    assert code == 0 and out.count("PASS") == 2


def test_unblanketed_precondition_message(files):
    code, _, err = run("run", "--rule", "unblanketed", "--alpha", "0.6", "--beta", "0.7", files["p60"])
    assert code == 1 and "requires α ≥ β > 1/2" in err


def test_validation_errors(files, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("0.5: a>b\n0.4: b>a\n")
    code, _, err = run("stats", str(bad))
    assert code == 1 and "weight sum out of tolerance" in err
    assert run("stats", str(tmp_path / "missing.txt"))[0] == 1
    assert run("stats", files["p60"], "--bogus")[0] == 1
    assert run("distortion", files["p60"])[0] == 1


def test_run_rules(files):
    for rule in ("copeland", "uncovered", "ranked-pairs", "unblanketed", "slv"):
        code, out, _ = run("run", "--rule", rule, files["p60"])
        rep = json.loads(out)
        assert code == 0 and rep["winner"] == "a" and rep["parameters"]["rule"] == rule
    code, out, _ = run("run", "--rule", "pdl", "--mu", "1/2", files["cycle"], "--theta", "0.7")
    rep = json.loads(out)
    assert code == 0 and rep["parameters"]["mu"] == "1/2" and len(rep["lottery"]) == 3


def test_parameters_are_echoed(files):
    code, out, _ = run("--seed", "7", "lottery", files["p60"], "--k", "2")
    prm = json.loads(out)["parameters"]
    assert prm == {"profile": files["p60"], "k": 2, "reverse": False, "max_iters": 100000, "seed": 7, "eps": 0.0001}


def test_lottery_output(files):
    code, out, _ = run("lottery", "--k", "1", files["p60"])
    rep = json.loads(out)
    assert code == 0
    assert set(rep) >= {"probs", "worst_response", "worst_value", "target_value", "certified"}
    assert rep["probs"] == ["1", "0"] and rep["target_value"] == "1/2"
    code, out, _ = run("lottery", "--k", "1", "--reverse", files["p60"])
    assert json.loads(out)["probs"] == ["0", "1"]


def test_uncertified_solve_exits_two():
    table = str(Path(__file__).parents[1] / "src/ktournament/data/lb5_jstar0.txt")
    code, out, _ = run("lottery", "--k", "2", "--max-iters", "1", "--eps", "1e-15", table)
    rep = json.loads(out)
    assert code == 2 and rep["certified"] is False
    assert run("lottery", "--k", "2", table)[0] == 0


def test_certify(files):
    code, out, _ = run("certify", "--method", "partition", "--jstar", "b", "--istar", "a", files["p60"])
    rep = json.loads(out)
    assert code == 0 and rep["lambda"] == "3/2" and rep["bound"] == "4"
    code, _, err = run("certify", "--method", "post-shift", "--jstar", "b", "--istar", "a", "--kcand", "b", files["p60"])
    assert code == 1 and "kcand" in err
    code, out, _ = run("certify", "--method", "regular-lambda", "--k", "2", "--theta", "0.51")
    assert abs(json.loads(out)["lambda"] - 0.8415) < 1e-4


def test_sweep_prune_on_lb5():
    code, out, _ = run("sweep", "--instance", "lb5", "--quantity", "prune-size", "--theta", "0.55:0.95:0.05")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 9
    assert rows[0]["theta"] == "11/20" and rows[-1]["theta"] == "19/20"


def test_sweep_stable_worst(files):
    code, out, _ = run("sweep", files["cycle"], "--quantity", "stable-worst", "--k", "1,2,3")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and [r["k"] for r in rows] == ["1", "2", "3"]
    for r in rows:
        k = int(r["k"])
        assert abs(float(Fraction(r["worst_value"])) - k / (k + 1)) < 1e-4


def test_sweep_errors(files):
    code, _, err = run("sweep", files["p60"], "--quantity", "stable-worst", "--k", "1,2", "--theta", "0.6,0.7")
    assert code == 1 and "exactly one ranged flag" in err
    code, _, err = run("sweep", files["p60"], "--quantity", "stable-worst", "--k", "3:1:1")
    assert code == 1 and "empty" in err
    assert run("sweep", files["p60"], "--quantity", "stable-worst")[0] == 1


def test_sweep_jobs_match_serial():
    argv = ["sweep", "--instance", "lb5", "--quantity", "rule-winner", "--rule", "slv", "--k", "1,2"]
    assert run(*argv) == run(*argv, "--jobs", "2")


def test_round_trips(files):
    _, out, _ = run("stats", files["p60"])
    emitted = json.loads(out)["profile"]
    assert parse_profile(json.dumps(emitted)) == parse_profile(open(files["p60"]).read())
    _, out, _ = run("lottery", "--k", "2", files["cycle"])
    probs = json.loads(out)["probs"]
    code, out2, _ = run("distortion", "--lottery", ",".join(str(Fraction(str(x))) for x in probs), files["cycle"])
    assert code == 0
    assert json.loads(out2)["parameters"]["lottery"]
    assert encode(Fraction(7, 3)) == "7/3" and Fraction(encode(Fraction(7, 3))) == Fraction(7, 3)
    assert encode(0.1234567890123456) == 0.123456789012
    assert encode(float("inf")) == "inf"


def test_determinism(files):
    argv = ["run", "--rule", "slv", "--k", "2", files["cycle"]]
    assert run(*argv) == run(*argv)


def test_formats(files):
    code, out, _ = run("--format", "csv", "distortion", "--candidate", "a", files["p60"])
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and rows[0][1] == "value" and rows[1][1] == "7/3"
    code, out, _ = run("stats", files["p60"], "--format", "table")
    assert code == 0 and out.splitlines()[1].startswith("m ")


def test_output_file(files):
    target = files["dir"] / "out.json"
    assert run("distortion", "--candidate", "b", files["p60"], "-o", str(target))[0] == 0
    assert json.loads(target.read_text())["value"] == "4"


def test_parse_range():
    assert parse_range("1:2:1/2") == [1, Fraction(3, 2), 2]
    assert parse_range("0.5,0.6") == [Fraction(1, 2), Fraction(3, 5)]


def test_module_entry_point(files):
    res = subprocess.run([sys.executable, "-m", "ktournament", "distortion", "--candidate", "b", files["p60"]],
                         capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["value"] == "4"
