import math

import pytest

from bowtie_cap import weights as wm
from bowtie_cap.decider import DecideConfig, aggregate, decide_bowtie_pi, exponent_vs_p, p1_slope_check


def test_aggregate_rules():
    assert aggregate(["holds", "holds", "holds"]) == "supports_pPI"
    # a definite failure is not outvoted by borderline routes
    assert aggregate(["fails", "fails", "borderline"]) == "does_not_support"
    assert aggregate(["holds", "holds", "borderline"]) == "borderline"
    assert aggregate(["fails", "fails", "fails"]) == "does_not_support"
    assert aggregate(["holds", "fails", "holds"]) == "inconsistent"
    assert aggregate(["holds", "unevaluated", "holds"]) == "supports_pPI"
    assert aggregate(["unevaluated"] * 3) == "borderline"


@pytest.mark.parametrize(
    "W,p,expected",
    [
        (wm.power_log(2, -1.0), 2.0, "supports_pPI"),
        (wm.constant(2), 2.0, "does_not_support"),
        (wm.constant(2), 3.0, "supports_pPI"),
    ],
)
def test_decision_examples(W, p, expected):
    rep = decide_bowtie_pi(W, p)
    assert rep.final == expected
    assert set(rep.routes().values()) <= {"holds", "fails"}


def test_staircase_decisions():
    W = wm.dyadic_staircase()
    assert decide_bowtie_pi(W, 4.5).final == "supports_pPI"
    assert decide_bowtie_pi(W, 3.9).final == "does_not_support"


@pytest.mark.parametrize("n,expected", [(1, "holds"), (2, "fails")])
def test_p1_slope_on_lebesgue(n, expected):
    assert p1_slope_check(wm.constant(n)) == expected


def test_p1_slope_inverse_radius():
    assert p1_slope_check(wm.power_log(2, -1.0)) == "holds"


def test_exponent_route_examples():
    assert exponent_vs_p(wm.constant(2), 3.0)["verdict"] == "holds"
    crit = exponent_vs_p(wm.dyadic_staircase(), 4.0)
    assert crit["verdict"] == "fails" and crit.get("critical")
    W = wm.truncated_power(2, -1.0)
    assert exponent_vs_p(W, 1.5, R0=1.0, r_min=1e-6)["verdict"] == "holds"
    assert exponent_vs_p(W, 1.5, R0=math.inf, r_min=1e-6)["verdict"] == "fails"
    with pytest.raises(ValueError):
        exponent_vs_p(W, 1.0)


def test_monotone_in_p():
    W = wm.power_log(2, 0.5, 2.0)
    finals = [decide_bowtie_pi(W, p).final for p in (1.5, 2.0, 2.5, 3.0, 4.0)]
    first = finals.index("supports_pPI")
    assert all(f == "supports_pPI" for f in finals[first:])


def test_report_serializes():
    d = decide_bowtie_pi(wm.power_log(1, 0.0, 2.0), 1.0).to_dict()
    assert d["final"] in ("supports_pPI", "does_not_support", "borderline")
    assert d["exponent_route"]["kind"] == "p1_slope"
    assert any("quadrant" in note for note in d["notes"])


def test_config_validation():
    with pytest.raises(ValueError):
        DecideConfig(delta_Q=0.0)
    with pytest.raises(ValueError):
        DecideConfig(r_min=2.0, R0=1.0)
    with pytest.raises(ValueError):
        decide_bowtie_pi(wm.constant(1), 0.5)
