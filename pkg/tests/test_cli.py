import json
from fractions import Fraction

import pandas as pd
import pytest

from hyperurn.cli import RunConfig, cmd_analyze, cmd_exact, cmd_oracle_check, main, rational, render


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_analyze_theta2(capsys):
    code, out, _ = run(capsys, "analyze", "--theta", "2", "--k", "3", "--format", "json")
    assert code == 0
    document = json.loads(out)
    assert document["schema"] == 1
    assert document["command"] == "analyze"
    assert document["sigma_sylvester"][0][0] == pytest.approx(1 / 12, rel=1e-8)
    assert document["cov3_closed_form"][0][1] == pytest.approx(-7 / 72)
    assert document["passed"] is True


def test_analyze_single_level_spectrum():
    result = cmd_analyze(RunConfig(command="analyze", theta=3, k=1))
    assert result.document["eigenvalues"] == pytest.approx([1.0, -2.0])
    assert result.document["cov3_closed_form"] is None
    assert result.passed


def test_analyze_table_is_rounded(capsys):
    code, out, _ = run(capsys, "analyze", "--theta", "2")
    assert code == 0
    assert "0.083" in out
    assert "0.0833" not in out


@pytest.mark.parametrize("argv", [
    ["analyze", "--theta", "1"],
    ["exact", "--theta", "3", "--k", "0", "--n", "2"],
    ["exact", "--n", "-1"],
    ["simulate", "--format", "xml"],
])
def test_usage_errors_exit_2(capsys, argv):
    with pytest.raises(SystemExit) as excinfo:
        main(argv)
    assert excinfo.value.code == 2


def test_exact_examples():
    first = cmd_exact(RunConfig(command="exact", theta=3, k=3, n=1))
    assert [level["exact"] for level in first.document["levels"][:2]] == ["2/1", "2/1"]

    initial = cmd_exact(RunConfig(command="exact", theta=2, k=3, n=0))
    assert [level["exact"] for level in initial.document["levels"]] == ["2/1", "0/1", "0/1"]

    third = cmd_exact(RunConfig(command="exact", theta=2, k=3, n=3))
    assert third.document["levels"][0]["exact"] == "11/4"
    assert third.document["levels"][0]["closed_form"] == "11/4"


def test_exact_at_rational_limit(capsys):
    code, out, _ = run(capsys, "exact", "--theta", "3", "--k", "3", "--n", "10000", "--format", "json")
    assert code == 0
    document = json.loads(out)
    assert document["rational"] is True
    for level in document["levels"]:
        numerator, denominator = level["exact"].split("/")
        assert numerator.isdigit() and denominator.isdigit()
        assert abs(level["difference"]) < 1e-2 * level["asymptotic"]
    assert max(len(level["exact"]) for level in document["levels"]) > 4300


def test_rational_keeps_every_digit():
    value = Fraction(10 ** 5000 + 1, 3)
    text = rational(value)
    assert len(text) == 5001 + 2
    assert text.endswith("/3")


def test_exact_csv(capsys):
    code, out, _ = run(capsys, "exact", "--theta", "2", "--n", "3", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].split(",")[:3] == ["level", "exact", "exact_rational"]
    assert lines[1].split(",")[2] == "11/4"


@pytest.mark.parametrize("theta,k,n", [(2, 2, 4), (3, 3, 5)])
def test_oracle_check_passes(theta, k, n):
    result = cmd_oracle_check(RunConfig(command="oracle-check", theta=theta, k=k, n=n, reps=2000))
    assert result.passed, result.failures
    assert {check["check"] for check in result.document["checks"]} == {
        "total_probability", "mean_recursion", "level12_formula", "simulation_band",
    }


def test_oracle_check_cap(capsys):
    code, _, err = run(capsys, "oracle-check", "--n", "10000")
    assert code == 1
    assert "StateSpaceExceeded" in err


def test_simulate_needs_two_replications(capsys):
    code, _, err = run(capsys, "simulate", "--reps", "1", "--n", "10")
    assert code == 1
    assert "InsufficientReplications" in err


def test_simulate_json_is_reproducible(tmp_path, capsys):
    outputs = []
    for name, workers in [("a.json", "1"), ("b.json", "4"), ("c.json", "16")]:
        path = tmp_path / name
        code, _, _ = run(capsys, "simulate", "--theta", "3", "--n", "40", "--reps", "60",
                         "--seed", "9501", "--workers", workers, "--format", "json", "--out", str(path))
        assert code == 0
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]
    document = json.loads(outputs[0])
    assert document["report"]["R"] == 60
    assert len(document["theory"]["mu"]) == 3


def test_simulate_csv_has_theory_columns(tmp_path, capsys):
    path = tmp_path / "report.csv"
    code, _, _ = run(capsys, "simulate", "--n", "40", "--reps", "30", "--format", "csv", "--out", str(path))
    assert code == 0
    frame = pd.read_csv(path)
    assert list(frame.columns[:6]) == ["theta", "k", "n", "R", "seed", "mu_1"]
    assert "sigma_3_3_theory" in frame.columns
    assert frame.loc[0, "R"] == 30


def test_unwritable_output(tmp_path, capsys):
    target = tmp_path / "missing" / "out.json"
    code, _, err = run(capsys, "exact", "--n", "2", "--out", str(target))
    assert code == 1
    assert str(target) in err


def test_render_json_ends_with_newline():
    result = cmd_exact(RunConfig(command="exact", theta=2, k=2, n=2))
    assert render(result, "json").endswith("}\n")
