import csv
import io
import json
import math

import pytest

from bowtie_cap import cli


def run(capsys, *args):
    code = cli.main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_three_pi(capsys):
    code, out, _ = run(capsys, "capacity", "--family", "power_log", "--n", "2", "--alpha", "-1.5", "--p", "2", "--outer", "1")
    rep = json.loads(out)
    assert code == 0
    assert rep["schema_version"] == "1"
    assert rep["result"]["value"] == pytest.approx(3 * math.pi, rel=1e-13)
    assert rep["config"]["outer_log2"] == 0.0


def test_divergent_reason(capsys):
    code, out, _ = run(capsys, "capacity", "--family", "constant", "--n", "2", "--p", "2", "--outer", "1")
    res = json.loads(out)["result"]
    assert code == 0 and res["value"] == 0.0 and res["reason"] == "divergent dual integral"


def test_bowtie_line(capsys):
    code, out, _ = run(capsys, "capacity", "--family", "constant", "--n", "1", "--p", "2", "--inner", "0", "--outer", "1", "--domain", "bowtie")
    assert code == 0 and json.loads(out)["result"]["value"] == 2.0


def test_oracle_flag(capsys):
    code, out, _ = run(capsys, "capacity", "--family", "power_log", "--alpha", "0.5", "--p", "2.5", "--inner", "0.01", "--outer", "2", "--oracle")
    res = json.loads(out)["result"]
    assert code == 0 and res["oracle"]["relative_difference"] < 1e-3


def test_power_of_two_radii(capsys):
    code, out, _ = run(capsys, "measure", "--family", "dyadic_staircase", "--radius", "2^-256")
    rep = json.loads(out)
    assert code == 0
    assert rep["config"]["radius_log2"] == -256.0
    assert rep["result"]["log_mu"] < -500


def test_monte_carlo_is_seeded(capsys):
    args = ("measure", "--family", "power_log", "--alpha", "1", "--radius", "1", "--center", "4", "--mc-samples", "20000", "--seed", "5")
    _, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args)
    assert a == b
    res = json.loads(a)["result"]
    assert res["monte_carlo"]["seed"] == 5
    assert abs(res["monte_carlo"]["estimate"] - res["mu"]) < 5 * res["monte_carlo"]["std_error"]


@pytest.mark.parametrize(
    "args,final",
    [
        (("--family", "power_log", "--n", "2", "--alpha", "-1", "--p", "2"), "supports_pPI"),
        (("--family", "constant", "--n", "2", "--p", "2"), "does_not_support"),
        (("--family", "dyadic_staircase", "--p", "4.5"), "supports_pPI"),
    ],
)
def test_decide(capsys, args, final):
    code, out, _ = run(capsys, "decide", *args)
    assert code == 0 and json.loads(out)["result"]["final"] == final


def test_ap_check_and_exponent(capsys):
    code, out, _ = run(capsys, "ap-check", "--family", "constant", "--n", "2", "--p", "3")
    assert code == 0 and json.loads(out)["result"]["verdict"] == "Ap"
    code, out, _ = run(capsys, "exponent", "--family", "constant", "--n", "3", "--R0", "1", "--r-min", "1e-4", "--p", "4")
    res = json.loads(out)["result"]
    assert code == 0 and res["dyadic"]["Q_hat"] == pytest.approx(3.0)
    assert res["capacity_condition"]["verdict"] == "holds"


def test_reproduce(capsys):
    code, out, _ = run(capsys, "reproduce", "ex-4.2")
    assert code == 0 and json.loads(out)["result"]["passed"]


def test_csv_matches_json(capsys):
    base = ("capacity", "--family", "power_log", "--alpha", "0.3", "--beta", "1", "--p", "2.2", "--inner", "0.1", "--outer", "3")
    _, js, _ = run(capsys, *base)
    _, cs, _ = run(capsys, *base, "--format", "csv")
    rows = dict(csv.reader(io.StringIO(cs)))
    rep = json.loads(js)
    assert float(rows["result.value"]) == rep["result"]["value"]
    assert float(rows["result.log_value"]) == rep["result"]["log_value"]


def test_text_output(capsys):
    code, out, _ = run(capsys, "capacity", "--family", "constant", "--n", "1", "--p", "2", "--outer", "1", "--format", "text")
    assert code == 0 and "result.value: 2" in out


def test_output_file(tmp_path, capsys):
    path = tmp_path / "r.json"
    code, out, _ = run(capsys, "capacity", "--family", "constant", "--n", "1", "--p", "2", "--outer", "1", "--output", str(path))
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["result"]["value"] == 2.0


def test_spec_file(tmp_path, capsys):
    spec = tmp_path / "w.json"
    spec.write_text(json.dumps({"family": "piecewise", "n": 1, "segments": [{"lo": 0, "hi": 1}, {"lo": 1, "hi": None, "coef": 4}]}))
    code, out, _ = run(capsys, "capacity", "--spec", str(spec), "--p", "2", "--outer", "2")
    # dual integral 1/2 + 1/8
    assert code == 0 and json.loads(out)["result"]["value"] == pytest.approx(1.6)


@pytest.mark.parametrize(
    "args",
    [
        ("capacity", "--family", "constant", "--p", "0.5", "--outer", "1"),
        ("capacity", "--family", "power_log", "--alpha", "-3", "--p", "2", "--outer", "1"),
        ("capacity", "--family", "constant", "--p", "2", "--inner", "2", "--outer", "1"),
        ("capacity", "--family", "piecewise", "--p", "2", "--outer", "1"),
        ("capacity", "--spec", "/nonexistent.json", "--p", "2", "--outer", "1"),
    ],
)
def test_invalid_input_exit_code(capsys, args):
    code, _, err = run(capsys, *args)
    assert code == 2 and "invalid input" in err


def test_bad_thread_setting(capsys, monkeypatch):
    monkeypatch.setenv("BOWTIE_CAP_THREADS", "zero")
    code, _, _ = run(capsys, "capacity", "--family", "constant", "--p", "2", "--outer", "1")
    assert code == 2


def test_numeric_failure_exit_code(capsys, monkeypatch):
    def boom(a, W):
        raise ArithmeticError("quadrature failed")

    monkeypatch.setitem(cli.COMMANDS, "capacity", boom)
    code, _, err = run(capsys, "capacity", "--family", "constant", "--p", "2", "--outer", "1")
    assert code == 3 and "numeric failure" in err


def test_mismatch_exit_code(capsys, monkeypatch):
    bundle = {"recipe": "ex-4.2", "claims": [{"claim": "x", "expected": 1, "measured": 2, "pass": False}], "passed": False}
    monkeypatch.setattr(cli, "run_recipe", lambda name: bundle)
    code, out, _ = run(capsys, "reproduce", "ex-4.2")
    assert code == 1 and json.loads(out)["result"]["passed"] is False


@pytest.mark.parametrize("text,expected", [("0.5", math.log(0.5)), ("2^-3", -3 * math.log(2)), ("2**10", 10 * math.log(2))])
def test_radius_parsing(text, expected):
    assert cli._radius_arg(text) == pytest.approx(expected)


def test_window_radii_accept_powers_of_two(capsys):
    code, out, _ = run(capsys, "exponent", "--family", "constant", "--n", "2", "--R0", "2^0", "--r-min", "2**-20")
    rep = json.loads(out)
    assert code == 0 and rep["config"]["r_min"] == 2.0**-20
    code, _, _ = run(capsys, "exponent", "--family", "constant", "--R0", "1", "--r-min", "2^-5000")
    assert code == 2
