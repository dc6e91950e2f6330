"""Decide whether a radial weight supports a p-Poincare inequality on the bow-tie.

Three independent routes are evaluated and must agree:

* ``condition_v``: the line weight w_tilde is A_p on R;
* ``condition_iv``: w is A_p on R^n and the capacity condition holds;
* ``exponent``: w is A_p on R^n and, for p > 1, p exceeds the decay
  exponent Q (the critical case falls back to the direct capacity check);
  for p = 1, mu(B_rho)/mu(B_r) >~ rho/r.

Route verdicts are ``holds``, ``fails``, ``borderline`` or ``unevaluated``
(the route raised).  Two definite routes that disagree make the final
verdict ``inconsistent``; that is a numerical bug or a tolerance problem
and is never resolved silently.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from .capacity import capacity_condition_check
from .errors import BowtieCapError
from .measure import decay_exponent, exponent_estimate, rise_profile
from .muckenhoupt import ApScanConfig, ap_scan
from .weights import RadialWeight

log = logging.getLogger(__name__)

FINALS = ("supports_pPI", "does_not_support", "inconsistent", "borderline")
_AP = {"Ap": "holds", "not_Ap": "fails", "borderline": "borderline"}


@dataclass(frozen=True)
class DecideConfig:
    delta_Q: float = 0.05
    r_min: float = 1e-12
    R0: float = math.inf
    R_max: float = 1e6
    cap_window: tuple = (1e-12, 1e3)
    F: float = 1e3
    slope_threshold: float = 0.05
    scan: ApScanConfig = field(default_factory=ApScanConfig)

    def __post_init__(self):
        if not (self.delta_Q > 0 and self.F > 1 and self.slope_threshold > 0):
            raise ValueError("tolerances must be positive (F > 1)")
        if not 0 < self.r_min < min(self.R0, self.R_max):
            raise ValueError("need 0 < r_min < R0 and r_min < R_max")


@dataclass
class DecisionReport:
    p: float
    weight: dict
    condition_v: dict
    condition_iv: dict
    exponent_route: dict
    final: str
    notes: list = field(default_factory=list)

    def routes(self):
        return {
            "condition_v": self.condition_v["verdict"],
            "condition_iv": self.condition_iv["verdict"],
            "exponent_route": self.exponent_route["verdict"],
        }

    def to_dict(self):
        return {
            "p": self.p,
            "weight": self.weight,
            "condition_v": self.condition_v,
            "condition_iv": self.condition_iv,
            "exponent_route": self.exponent_route,
            "final": self.final,
            "notes": self.notes,
        }


def _both(a: str, b: str) -> str:
    """Verdict of a conjunction of two conditions."""
    if "fails" in (a, b):
        return "fails"
    if "unevaluated" in (a, b):
        return "unevaluated"
    if a == b == "holds":
        return "holds"
    return "borderline"


def aggregate(verdicts) -> str:
    definite = {v for v in verdicts if v in ("holds", "fails")}
    if len(definite) == 2:
        return "inconsistent"
    evaluated = [v for v in verdicts if v != "unevaluated"]
    if not evaluated:
        return "borderline"
    if all(v == "holds" for v in evaluated):
        return "supports_pPI"
    if definite == {"fails"}:
        return "does_not_support"
    return "borderline"


def p1_slope_check(
    W: RadialWeight,
    window=(1e-12, 1e3),
    R0: float = math.inf,
    *,
    slope_threshold: float = 0.05,
    steps_per_octave: int = 2,
) -> str:
    """Whether mu(B_rho)/mu(B_r) >~ rho/r for all rho < r < R0.

    Equivalently the rise of log mu(B_r) - log r stays bounded as the
    radius grid is refined toward 0 (and infinity when R0 is infinite).
    """
    trend = rise_profile(W, window, R0, steps_per_octave).trend(1.0)
    if trend > slope_threshold:
        return "fails"
    if trend <= 0.5 * slope_threshold:
        return "holds"
    return "borderline"


def exponent_vs_p(
    W: RadialWeight,
    p: float,
    R0: float = math.inf,
    delta_Q: float = 0.05,
    *,
    r_min: float = 1e-12,
    R_max: float = 1e6,
    cap_window=(1e-12, 1e3),
    F: float = 1e3,
) -> dict:
    """Compare p with the decay exponent.

    Verdict ``holds`` when p > Q_hat + delta_Q, ``fails`` when
    p < Q_hat - delta_Q.  In between the capacity condition is checked
    directly and its verdict is used; both numbers are reported, together
    with the largest dyadic slope as a cross-check.
    """
    if not p > 1:
        raise ValueError("exponent comparison needs p > 1")
    est = decay_exponent(W, (r_min, R_max), R0)
    dy = exponent_estimate(W, R0, r_min, R_max=R_max if R0 == math.inf else None)
    out = {
        "Q_hat": est.Q_hat,
        "Q_hat_dyadic": dy.Q_hat,
        "saturation": dy.saturation,
        "delta_Q": delta_Q,
    }
    if p > est.Q_hat + delta_Q:
        out["verdict"] = "holds"
    elif p < est.Q_hat - delta_Q:
        out["verdict"] = "fails"
    else:
        cc = capacity_condition_check(W, p, cap_window, F=F, to_infinity=R0 == math.inf)
        out["critical"] = True
        out["capacity_check"] = cc.verdict
        out["verdict"] = cc.verdict
    return out


def _guard(fn, notes, label):
    try:
        return fn()
    except (BowtieCapError, ArithmeticError, ValueError) as exc:
        log.warning("%s unevaluated: %s", label, exc)
        notes.append(f"{label} unevaluated: {exc}")
        return None


def decide_bowtie_pi(W: RadialWeight, p: float, config: DecideConfig | None = None) -> DecisionReport:
    """Run every route and aggregate them."""
    if not p >= 1:
        raise ValueError("p must be >= 1")
    cfg = config or DecideConfig()
    notes = [
        "the p-PI on the closed quadrant is not evaluated separately: for radial doubling weights "
        "it is equivalent to the p-PI on R^n, which the A_p scans certify",
    ]
    if cfg.R0 == math.inf:
        notes.append(f"R0=inf proxied by R_max={cfg.R_max:g}")

    line = _guard(lambda: ap_scan(W, p, "line_wtilde", cfg.scan), notes, "condition_v")
    cond_v = {"verdict": _AP[line.verdict] if line else "unevaluated"}
    if line:
        cond_v["ap"] = line.to_dict()
        cond_v["ap"].pop("profile")

    rn = _guard(lambda: ap_scan(W, p, "Rn_radial", cfg.scan), notes, "condition_iv A_p")
    cc = _guard(
        lambda: capacity_condition_check(W, p, cfg.cap_window, F=cfg.F, slope_threshold=cfg.slope_threshold),
        notes,
        "capacity condition",
    )
    rn_v = _AP[rn.verdict] if rn else "unevaluated"
    cc_v = cc.verdict if cc else "unevaluated"
    cond_iv = {"verdict": _both(rn_v, cc_v), "ap_Rn": rn_v, "capacity_condition": cc_v}
    if rn:
        cond_iv["sup_ratio"] = rn.sup_ratio
        cond_iv["divergence_trend"] = rn.divergence_trend
    if cc:
        cond_iv["capacity_trend"] = cc.trend
        cond_iv["capacity_spread"] = cc.spread

    if p > 1:
        ex = _guard(
            lambda: exponent_vs_p(
                W, p, cfg.R0, cfg.delta_Q, r_min=cfg.r_min, R_max=cfg.R_max, cap_window=cfg.cap_window, F=cfg.F
            ),
            notes,
            "exponent route",
        )
        ex_v = ex["verdict"] if ex else "unevaluated"
        ex_route = {"kind": "p_vs_Q", "comparison": ex_v}
        if ex:
            ex_route.update({k: ex[k] for k in ("Q_hat", "Q_hat_dyadic", "saturation", "delta_Q")})
            if ex.get("critical"):
                ex_route["critical"] = True
                ex_route["capacity_check"] = ex["capacity_check"]
    else:
        ex_v = _guard(lambda: p1_slope_check(W, cfg.cap_window, cfg.R0, slope_threshold=cfg.slope_threshold), notes, "p1 slope check")
        ex_v = ex_v or "unevaluated"
        ex_route = {"kind": "p1_slope", "comparison": ex_v}
    ex_route["ap_Rn"] = rn_v
    ex_route["verdict"] = _both(rn_v, ex_v)

    final = aggregate([cond_v["verdict"], cond_iv["verdict"], ex_route["verdict"]])
    if final == "inconsistent":
        log.error("routes disagree for p=%g: %s", p, [cond_v["verdict"], cond_iv["verdict"], ex_route["verdict"]])
    return DecisionReport(p, W.summary(), cond_v, cond_iv, ex_route, final, notes)
