"""Muckenhoupt A_p checks for the line weight and for radial weights on R^n.

The A_p expression of a weight v on a set B is

    p > 1:  avg_B(v) * avg_B(v**(1/(1-p)))**(p-1)
    p = 1:  avg_B(v) / essinf_B(v)

and v is A_p when it is bounded over all balls.  Every quantity is computed
in log space from the piece table of a :class:`RadialWeight`, so balls at
radii like exp(-exp(14)) are as cheap as balls of radius 1.

A scan never certifies failure from a single large value.  It refines the
grid toward 0 and infinity along radii evenly spaced in log|log r| and fits
the growth of the running maximum; ``not_Ap`` needs either an infinite
ratio or a positive growth trend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .capacity import deep_probes, log_essinf
from .errors import OutOfRange
from .measure import log_ball_integral
from .parallel import pmap
from .quadrature import log_integral, lse
from .weights import RadialWeight

SPACES = ("line_wtilde", "Rn_radial")
LN2 = math.log(2.0)
OFFCENTER_LIMIT = 500.0  # |log t| beyond which off-center balls are skipped in R^n


def _exp(v: float) -> float:
    return math.exp(v) if v < 709.0 else math.inf


def _dual_exponent(p: float) -> float:
    return 1.0 / (1.0 - p)


# ---------------------------------------------------------------------------
# line weight


def _line_segments(a: float, b: float):
    """Cover of {|rho| : rho in (a, b)} as (log lo, log hi, multiplicity)."""
    if a >= 0:
        return [(math.log(a) if a > 0 else -math.inf, math.log(b), 1)]
    if b <= 0:
        return [(math.log(-b) if b < 0 else -math.inf, math.log(-a), 1)]
    m, M = min(-a, b), max(-a, b)
    segs = [(-math.inf, math.log(m), 2)]
    if M > m:
        segs.append((math.log(m), math.log(M), 1))
    return segs


def _shape_segments(x: float, kappa: float | None):
    """Segments and log length of the interval (t - r, t + r), t = e^x, r = kappa t.

    ``kappa=None`` is the interval centered at 0 with radius e^x.
    """
    if kappa is None:
        return [(-math.inf, x, 2)], x + LN2
    ll = x + math.log(2.0 * kappa)
    if kappa < 1:
        return [(x + math.log1p(-kappa), x + math.log1p(kappa), 1)], ll
    if kappa == 1:
        return [(-math.inf, x + LN2, 1)], ll
    d = x + math.log(kappa - 1.0)
    return [(-math.inf, d, 2), (d, x + math.log(kappa + 1.0), 1)], ll


def _log_seg_integral(W, s, segs):
    parts = []
    for lo, hi, mult in segs:
        v = log_integral(W, s, lo, hi)
        if v == math.inf:
            return math.inf
        parts.append(v + math.log(mult))
    return lse(parts)


def _line_log_ratio(W: RadialWeight, p: float, segs, log_len: float) -> float:
    # the factor omega in w_tilde = w_hat / omega cancels in the A_p expression
    avg = _log_seg_integral(W, 1.0, segs) - log_len
    if p == 1:
        lo = min(s[0] for s in segs)
        hi = max(s[1] for s in segs)
        return avg - log_essinf(W, lo, hi)
    dual = _log_seg_integral(W, _dual_exponent(p), segs)
    if dual == math.inf:
        return math.inf
    return avg + (p - 1.0) * (dual - log_len)


def ap_ratio_interval(W: RadialWeight, a: float, b: float, p: float) -> float:
    """A_p expression of the line weight of ``W`` on the interval (a, b).

    The line weight is w_tilde(rho) = |rho|**(n-1) w(|rho|); for ``n = 1``
    it is w itself.  Returns ``inf`` when the dual average diverges (or the
    essential infimum vanishes for p = 1).
    """
    if not (math.isfinite(a) and math.isfinite(b) and b > a):
        raise ValueError("interval must be bounded and nondegenerate")
    if not p >= 1:
        raise ValueError("p must be >= 1")
    return _exp(_line_log_ratio(W, p, _line_segments(a, b), math.log(b - a)))


# ---------------------------------------------------------------------------
# radial weight on R^n


def _log_ball_volume(n: int, x: float, omega: float) -> float:
    return math.log(omega / n) + n * x


def _rn_log_integral(W, s, x, kappa):
    if kappa is None:
        n = W.n
        return log_integral(W, s, -math.inf, x, q=(n - 1) * (1.0 - s), c=(1.0 - s) * math.log(W.omega))
    t = math.exp(x)
    return log_ball_integral(W, s, t, kappa * t)


def _rn_log_ratio(W: RadialWeight, p: float, x: float, kappa: float | None) -> float:
    n = W.n
    xr = x if kappa is None else x + math.log(kappa)
    lv = _log_ball_volume(n, xr, W.omega)
    avg = _rn_log_integral(W, 1.0, x, kappa) - lv
    if p == 1:
        if kappa is None:
            lo, hi = -math.inf, x
        else:
            lo = x + math.log1p(-kappa) if kappa < 1 else (-math.inf if kappa == 1 else x + math.log(kappa - 1.0))
            hi = x + math.log1p(kappa)
            if kappa > 1:
                lo = -math.inf
        return avg - log_essinf(W, lo, hi, q=-(n - 1), c=-math.log(W.omega))
    dual = _rn_log_integral(W, _dual_exponent(p), x, kappa)
    if dual == math.inf:
        return math.inf
    return avg + (p - 1.0) * (dual - lv)


# ---------------------------------------------------------------------------
# scans


@dataclass(frozen=True)
class ApScanConfig:
    """Grid for :func:`ap_scan`.

    Centers and radii run over ``window`` at ``steps_per_decade``; every
    scale is probed with a ball centered at the origin and with off-center
    balls of radius ``kappa * t`` for each ``kappa`` in ``shapes`` (values
    above 1 straddle the origin, 1/4 is the near/far case split).  Beyond
    the window, ``probe_span`` nats of log|log r| are added at ``probe_step``.
    """

    window: tuple = (1e-6, 1e6)
    steps_per_decade: int = 2
    shapes: tuple = (0.0625, 0.25, 0.5, 1.0, 2.0, 4.0)
    probe_span: float = 14.0
    probe_step: float = 0.5
    slope_threshold: float = 0.05

    def __post_init__(self):
        lo, hi = self.window
        if not (0 < lo and hi >= 1e4 * lo):
            raise ValueError("scan window must span at least 4 decades")
        if self.steps_per_decade < 1 or self.probe_step <= 0 or self.slope_threshold <= 0:
            raise ValueError("grid sizes and thresholds must be positive")
        if any(k <= 0 for k in self.shapes):
            raise ValueError("shape factors must be positive")


@dataclass
class ApReport:
    p: float
    space: str
    sup_ratio: float
    log_sup_ratio: float
    witness: dict
    divergence_trend: float
    divergent: bool
    verdict: str
    grid: dict
    profile: list = field(default_factory=list)

    def to_dict(self):
        return {
            "p": self.p,
            "space": self.space,
            "sup_ratio": self.sup_ratio,
            "log_sup_ratio": self.log_sup_ratio,
            "witness": self.witness,
            "divergence_trend": self.divergence_trend,
            "divergent": self.divergent,
            "verdict": self.verdict,
            "grid": self.grid,
            "profile": [{"log_scale": x, "log_ratio": v} for x, v in self.profile],
        }


def _scale_max(W, p, space, x, shapes):
    best, arg = -math.inf, None
    kappas = [None] + list(shapes)
    if space == "Rn_radial" and abs(x) > OFFCENTER_LIMIT:
        kappas = [None]
    for kappa in kappas:
        if space == "line_wtilde":
            segs, ll = _shape_segments(x, kappa)
            v = _line_log_ratio(W, p, segs, ll)
        else:
            v = _rn_log_ratio(W, p, x, kappa)
        if v > best or arg is None:
            best, arg = v, kappa
    return best, arg


def _running_max_trend(base_max, lr, u):
    if len(lr) < 4:
        return 0.0
    run = np.maximum.accumulate(np.maximum(lr, base_max))
    if not np.all(np.isfinite(run)):
        return math.inf
    half = len(run) // 2
    return float(np.polyfit(u[half:], run[half:], 1)[0])


def ap_scan(W: RadialWeight, p: float, space: str = "line_wtilde", config: ApScanConfig | None = None) -> ApReport:
    """Scan the A_p expression over balls at all scales and classify.

    ``divergence_trend`` is the slope of the running maximum of the log
    ratio against log|log r| on the refinement probes, the larger of the
    two directions.  Verdicts: ``not_Ap`` if some ratio is infinite or the
    trend exceeds ``slope_threshold``; ``Ap`` if the trend is below half of
    it; ``borderline`` otherwise.
    """
    if space not in SPACES:
        raise ValueError(f"unknown space {space!r}; expected one of {SPACES}")
    if not p >= 1:
        raise ValueError("p must be >= 1")
    cfg = config or ApScanConfig()
    x_lo, x_hi = math.log(cfg.window[0]), math.log(cfg.window[1])
    nx = int(round((x_hi - x_lo) / math.log(10.0) * cfg.steps_per_decade)) + 1
    base = np.linspace(x_lo, x_hi, nx)
    below, above = deep_probes(x_lo, x_hi, span=cfg.probe_span, step=cfg.probe_step)
    xs = np.concatenate([base, below, above])
    res = pmap(lambda x: _scale_max(W, p, space, float(x), cfg.shapes), xs)
    lr = np.array([r[0] for r in res])

    i = int(np.argmax(lr))
    x_w, kappa = float(xs[i]), res[i][1]
    if kappa is None:
        witness = {"center_log": -math.inf, "radius_log": x_w, "center": 0.0, "radius": _exp(x_w)}
    else:
        xr = x_w + math.log(kappa)
        witness = {"center_log": x_w, "radius_log": xr, "center": _exp(x_w), "radius": _exp(xr)}

    divergent = bool(np.any(np.isposinf(lr)))
    nb, na = len(base), len(below)
    base_max = float(lr[:nb].max())
    trend = max(
        _running_max_trend(base_max, lr[nb : nb + na], np.log(-below)),
        _running_max_trend(base_max, lr[nb + na :], np.log(above)),
    )
    if divergent or trend > cfg.slope_threshold:
        verdict = "not_Ap"
    elif trend <= 0.5 * cfg.slope_threshold:
        verdict = "Ap"
    else:
        verdict = "borderline"
    order = np.argsort(xs)
    grid = {
        "window": list(cfg.window),
        "steps_per_decade": cfg.steps_per_decade,
        "shapes": list(cfg.shapes),
        "probe_span": cfg.probe_span,
        "probe_step": cfg.probe_step,
        "scales": int(len(xs)),
    }
    return ApReport(
        p=p,
        space=space,
        sup_ratio=_exp(float(lr[i])),
        log_sup_ratio=float(lr[i]),
        witness=witness,
        divergence_trend=float(trend),
        divergent=divergent,
        verdict=verdict,
        grid=grid,
        profile=[(float(xs[j]), float(lr[j])) for j in order],
    )


def decade_growth(W: RadialWeight, p: float, space: str = "line_wtilde", decades: int = 6, r0: float = 1.0):
    """sup of the A_p expression over balls of radius r0 * 10**-k, k = 0..decades.

    Returns the list of running suprema; consecutive quotients give the
    growth per decade of refinement toward the origin (``inf`` entries mean
    the dual average already diverges).
    """
    out, run = [], 0.0
    for k in range(decades + 1):
        x = math.log(r0) - k * math.log(10.0)
        v, _ = _scale_max(W, p, space, x, ApScanConfig().shapes)
        run = max(run, _exp(v))
        out.append(run)
    return out


# ---------------------------------------------------------------------------
# closed forms


def classify_powerlog_A1(n: int, alpha: float, beta: float) -> str:
    """A_1 class of |x|**alpha * phi(|x|)**beta on R^n."""
    if n < 1 or not alpha > -n:
        raise OutOfRange("need n >= 1 and alpha > -n")
    return "A1" if alpha < 0 or (alpha == 0 and beta >= 0) else "not_A1"


def classify_power_Ap_Rn(n: int, alpha: float, p: float) -> str:
    """A_p class of |x|**alpha on R^n."""
    if n < 1 or not alpha > -n or not p >= 1:
        raise OutOfRange("need n >= 1, alpha > -n and p >= 1")
    return "Ap" if alpha == 0 or -n < alpha < n * (p - 1) else "not_Ap"
