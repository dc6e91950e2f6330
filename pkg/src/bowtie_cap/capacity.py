"""Variational p-capacities of centered annuli and of the origin.

For a radial weight the capacity of the annulus B_r \\ B_r' in R^n is

    p > 1:  ( integral_{r'}^{r} w_hat**(1/(1-p)) )**(1-p)
    p = 1:  essinf_{r' < rho < r} w_hat

and the positive hyperquadrant and the bow-tie carry the factors 2**-n and
2**(1-n) of the full-space value.  A capacity of exactly 0 is returned when
the dual integral diverges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import OracleDisagreement, OutOfRange
from .measure import _lattice, deep_probes, lattice_log_mu
from .quadrature import log_integral
from .weights import RadialWeight, log_phi

DOMAINS = ("full", "quadrant", "bowtie")
BOUNDARY_TOL = 1e-12


def domain_log_factor(n: int, domain: str) -> float:
    """log of cap_domain / cap_full."""
    if domain == "full":
        return 0.0
    if domain == "quadrant":
        return -n * math.log(2.0)
    if domain == "bowtie":
        return (1 - n) * math.log(2.0)
    raise ValueError(f"unknown domain {domain!r}; expected one of {DOMAINS}")


def domain_factor(n: int, domain: str) -> float:
    """cap_domain / cap_full as an exact power of two."""
    domain_log_factor(n, domain)
    return {"full": 1.0, "quadrant": math.ldexp(1.0, -n), "bowtie": math.ldexp(1.0, 1 - n)}[domain]


@dataclass(frozen=True)
class CapacityQuery:
    p: float
    r_inner: float
    r_outer: float
    domain: str = "full"

    def __post_init__(self):
        if not self.p >= 1:
            raise ValueError("p must be >= 1")
        if not 0 <= self.r_inner < self.r_outer:
            raise ValueError("need 0 <= r_inner < r_outer")
        if self.domain not in DOMAINS:
            raise ValueError(f"unknown domain {self.domain!r}")


@dataclass
class CapacityResult:
    value: float
    log_value: float
    method: str
    query: CapacityQuery
    reason: str | None = None

    def to_dict(self):
        d = {
            "value": self.value,
            "log_value": self.log_value,
            "method": self.method,
            "p": self.query.p,
            "r_inner": self.query.r_inner,
            "r_outer": self.query.r_outer,
            "domain": self.query.domain,
        }
        if self.reason:
            d["reason"] = self.reason
        return d


def _x(r):
    return -math.inf if r == 0 else math.log(r)


def log_essinf(W: RadialWeight, lo: float, hi: float, q: float = 0.0, c: float = 0.0) -> float:
    """log essinf of exp(c) rho**q w_hat(rho) over log radii (lo, hi).

    Each piece is monotone apart from at most one stationary point of the
    phi factor, so the infimum is attained at a clipped piece endpoint, at
    such a point, or as a limit at 0 or infinity.
    """
    P = W.pieces
    plo, phi_ = P.lo, W._hi
    sel = np.nonzero((phi_ > lo) & (plo < hi))[0]
    best = math.inf
    for j in sel:
        L = P.scale[j]
        kk = P.k[j] + q
        b = P.b[j]
        ends = []
        for keep, pu, pv, qx in ((lo <= plo[j], P.lo_u[j], P.lo_v[j], lo), (hi >= phi_[j], P.hi_u[j], P.hi_v[j], hi)):
            u, v = (pu, pv) if keep else (qx, 0.0)
            ends.append((u, v))
        cands = []
        for (u, v), side in zip(ends, ("lo", "hi")):
            if math.isinf(u):
                cands.append(_limit(kk, b, side, P.c_u[j] + c + P.c_v[j] * L))
                continue
            vv = P.c_v[j] + kk * v
            if abs(vv) <= 1e-10 * (abs(P.c_v[j]) + abs(kk * v)):
                vv = 0.0
            x = u + v * L
            val = P.c_u[j] + c + kk * u + vv * L
            if b != 0.0:
                val += b * float(log_phi(x))
            cands.append(val)
        if b != 0.0 and kk != 0.0 and b < 0:
            xs = -b / kk
            xl = ends[0][0] + ends[0][1] * L
            xh = ends[1][0] + ends[1][1] * L
            if xl < xs < xh and xs < -1.0:
                cands.append(P.c_u[j] + c + kk * xs + b * math.log(-xs))
        best = min(best, min(cands))
    return best


def _limit(kk, b, side, C):
    if side == "lo":  # rho -> 0, phi -> inf
        if kk > 0 or (kk == 0 and b < 0):
            return -math.inf
        if kk < 0 or b > 0:
            return math.inf
        return C
    if kk > 0:
        return math.inf
    if kk < 0:
        return -math.inf
    return C


def log_annulus_capacity(W: RadialWeight, p: float, lo: float, hi: float, domain: str = "full") -> float:
    """log capacity of the annulus with log radii ``lo < hi`` (``lo = -inf`` for the point)."""
    if p < 1:
        raise ValueError("p must be >= 1")
    f = domain_log_factor(W.n, domain)
    if p == 1:
        return log_essinf(W, lo, hi) + f
    dual = log_integral(W, 1.0 / (1.0 - p), lo, hi)
    if dual == math.inf:
        return -math.inf
    return (1.0 - p) * dual + f


def annulus_capacity(W: RadialWeight, p: float, r_inner: float, r_outer: float, domain: str = "full") -> float:
    """Capacity of the closed ball B_{r_inner} (the origin if 0) in B_{r_outer}."""
    CapacityQuery(p, r_inner, r_outer, domain)
    return math.exp(log_annulus_capacity(W, p, _x(r_inner), math.log(r_outer), domain))


def capacity(W: RadialWeight, query: CapacityQuery) -> CapacityResult:
    lv = log_annulus_capacity(W, query.p, _x(query.r_inner), math.log(query.r_outer), query.domain)
    method = "closed_form_essinf" if query.p == 1 else "closed_form_dual_integral"
    reason = None
    if lv == -math.inf:
        reason = "vanishing essential infimum" if query.p == 1 else "divergent dual integral"
    return CapacityResult(math.exp(lv), lv, method, query, reason)


def point_capacity(W: RadialWeight, p: float, r: float, domain: str = "full") -> float:
    """cap({0}, B_r)."""
    return annulus_capacity(W, p, 0.0, r, domain)


def point_capacity_limit(W: RadialWeight, p: float, r: float, domain: str = "full", zero_threshold: float = 1e-300):
    """Annulus capacities for inner radii r * 10**-k, k = 2..8.

    Returns ``(values, converged)``; converged means the last two values
    differ by < 1e-6 relative or both fall below ``zero_threshold``.
    """
    vals = [annulus_capacity(W, p, r * 10.0**-k, r, domain) for k in range(2, 9)]
    a, b = vals[-2], vals[-1]
    conv = abs(a - b) <= 1e-6 * max(abs(a), abs(b)) or (a < zero_threshold and b < zero_threshold)
    return vals, bool(conv)


# ---------------------------------------------------------------------------
# discrete oracle


def _newton_increments(logc, p, tol=1e-13, max_iter=500):
    """Minimize sum c_i d_i**p subject to sum d_i = 1, d > 0, by damped Newton.

    The Newton direction for d is applied multiplicatively, z = log d, so
    positivity never limits the step.  Near p = 1 the optimum sits on the
    cheapest cells and the others shrink like exp(-1/(p-1)); in z that is
    one ordinary step.  Returns log d and the iteration count.
    """
    q = p - 1.0
    z = np.full(len(logc), -math.log(len(logc)))

    def log_energy(zz):
        return float(logsumexp(logc + p * zz))

    E = log_energy(z)
    for it in range(max_iter):
        # with inv = 1/H: g * inv = d/q, so nu = 1/(q sum inv)
        log_g = math.log(p) + logc + q * z
        log_inv = (2.0 - p) * z - logc - math.log(p * q)
        rel = 1.0 - np.exp(-math.log(q) - float(logsumexp(log_inv)) - log_g)
        lw = logc + p * z
        share = np.exp(lw - lw.max())
        dec = p / q * float(np.sum(share * rel * rel)) / float(share.sum())
        if dec <= tol:
            return z, it
        dz = -rel / q
        t = 1.0
        while True:
            trial = z + t * dz
            trial -= float(logsumexp(trial))
            Et = log_energy(trial)
            if Et <= E + math.log1p(-1e-4 * t * min(dec, 0.999)) or t < 1e-14:
                break
            t *= 0.5
        z, E = trial, Et
    raise OracleDisagreement("Newton iteration for the discrete oracle did not converge")


def discrete_capacity_oracle(
    W: RadialWeight,
    p: float,
    r_inner: float,
    r_outer: float,
    N: int = 4096,
    domain: str = "full",
    agree_tol: float = 1e-6,
) -> float:
    """Capacity of a discretized radial problem on a log-spaced grid of N cells.

    The energy sum_i w_hat(rho_i*) |u_i - u_{i-1}|**p / drho_i**(p-1) is
    minimized over node values with u = 1 at r_inner and 0 at r_outer, once
    by the series-composition formula and once by damped Newton iteration
    on the increments; the two must agree to ``agree_tol``.  For p = 1 the
    minimum of w_hat over cell midpoints is returned.
    """
    if not r_inner > 0:
        raise ValueError("the oracle needs r_inner > 0")
    if N < 64:
        raise ValueError("N must be at least 64")
    x = np.linspace(math.log(r_inner), math.log(r_outer), N + 1)
    rho = np.exp(x)
    drho = np.diff(rho)
    lw = W.log_w_hat(0.5 * (x[:-1] + x[1:]))
    f = domain_log_factor(W.n, domain)
    if p == 1:
        return math.exp(float(lw.min()) + f)
    s = 1.0 / (1.0 - p)
    series = (1.0 - p) * float(logsumexp(np.log(drho) + s * lw))

    logc = lw - (p - 1.0) * np.log(drho)
    log_d, _ = _newton_increments(logc, p)
    energy = float(logsumexp(logc + p * log_d))
    if abs(energy - series) > agree_tol:
        raise OracleDisagreement(f"series {series:.12g} vs Newton {energy:.12g} (log values)")
    return math.exp(series + f)


# ---------------------------------------------------------------------------
# capacity condition


@dataclass
class CapacityConditionReport:
    p: float
    window: tuple
    ratio_samples: list = field(repr=False)
    verdict: str
    trend: float
    spread: float
    upper_bound_ok: bool
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {
            "p": self.p,
            "window": list(self.window),
            "verdict": self.verdict,
            "trend": self.trend,
            "spread": self.spread,
            "upper_bound_ok": self.upper_bound_ok,
            "ratio_samples": [[r, v] for r, v in self.ratio_samples],
            "notes": self.notes,
        }


def log_capacity_ratios(W: RadialWeight, p: float, xs: np.ndarray) -> np.ndarray:
    """log of cap({0}, B_r) r**p / mu(B_r) at increasing log radii ``xs``."""
    lm = lattice_log_mu(W, xs)
    if p == 1:
        lc = np.array([log_essinf(W, -math.inf, x) for x in xs])
    else:
        s = 1.0 / (1.0 - p)
        dual = np.empty(len(xs))
        dual[0] = log_integral(W, s, -math.inf, xs[0])
        for i in range(1, len(xs)):
            dual[i] = np.logaddexp(dual[i - 1], log_integral(W, s, xs[i - 1], xs[i]))
        with np.errstate(invalid="ignore"):
            lc = np.where(np.isposinf(dual), -math.inf, (1.0 - p) * dual)
    return lc + p * xs - lm


def _running_min_trend(window_min, probes_lr, probes_u):
    if len(probes_lr) < 4:
        return 0.0
    run = np.minimum.accumulate(np.minimum(probes_lr, window_min))
    half = len(run) // 2
    return float(np.polyfit(probes_u[half:], run[half:], 1)[0])


def capacity_condition_check(
    W: RadialWeight,
    p: float,
    window=(1e-12, 1e3),
    *,
    F: float = 1e3,
    slope_threshold: float = 0.05,
    steps_per_octave: int = 2,
    to_infinity: bool = True,
) -> CapacityConditionReport:
    """Test cap({0}, B_r) ~ r**-p mu(B_r) for all r > 0.

    The ratio cap r**p / mu(B_r) is sampled on a lattice over ``window`` and
    on probes refining toward 0 (and infinity) evenly in log|log r|.
    ``trend`` is the slope of the running minimum of log(ratio) against
    log|log r| over the outer half of the probes.  ``fails`` when the ratio
    vanishes or the trend is below ``-slope_threshold``; ``holds`` when the
    trend is flat and the overall spread is within ``F``; otherwise
    ``borderline``.
    """
    r_min, r_max = window
    if not r_max >= 1e3 * r_min:
        raise ValueError("window must span at least 3 decades")
    x_lo, x_hi = math.log(r_min), math.log(r_max)
    xs = _lattice(x_lo, x_hi, steps_per_octave)
    below, above = deep_probes(x_lo, x_hi, to_infinity=to_infinity)
    allx = np.concatenate([below[::-1], xs, above])
    lr_all = log_capacity_ratios(W, p, allx)
    nb = len(below)
    lr_below = lr_all[:nb][::-1]
    lr = lr_all[nb : nb + len(xs)]
    lr_above = lr_all[nb + len(xs) :]
    samples = [(float(math.exp(x)), float(math.exp(v))) for x, v in zip(xs, lr)]
    upper_ok = bool(np.all(lr_all <= p * math.log(2.0) + 1e-9))
    notes = ["ratio of the full-space capacity; quadrant and bow-tie differ by constant factors"]
    if np.any(np.isneginf(lr_all)):
        return CapacityConditionReport(p, tuple(window), samples, "fails", -math.inf, math.inf, upper_ok, notes + ["capacity vanishes"])
    wmin = float(lr.min()) if len(lr) else math.inf
    trend = min(
        _running_min_trend(wmin, lr_below, np.log(-below)),
        _running_min_trend(wmin, lr_above, np.log(above)) if len(above) else 0.0,
    )
    spread = float(lr_all.max() - lr_all.min())
    if trend < -slope_threshold:
        verdict = "fails"
    elif spread <= math.log(F):
        verdict = "holds"
    else:
        verdict = "borderline"
    return CapacityConditionReport(p, tuple(window), samples, verdict, trend, spread, upper_ok, notes)


# ---------------------------------------------------------------------------
# closed-form classification for power-log weights


def capacity_positivity_classify_powerlog(n: int, p: float, alpha: float, beta: float) -> str:
    """'positive' or 'zero' for cap({0}, B_r) with w = |x|**alpha phi**beta."""
    if not alpha > -n or not p >= 1:
        raise OutOfRange("need alpha > -n and p >= 1")
    crit = p - n
    if alpha < crit - BOUNDARY_TOL:
        return "positive"
    if abs(alpha - crit) <= BOUNDARY_TOL and beta > p - 1:
        return "positive"
    if p == 1 and abs(alpha - (1 - n)) <= BOUNDARY_TOL and beta >= 0:
        return "positive"
    return "zero"


def capacity_condition_classify_powerlog(n: int, p: float, alpha: float, beta: float) -> bool:
    """Whether cap({0}, B_r) >~ r**-p mu(B_r) holds for all r."""
    if not alpha > -n or not p >= 1:
        raise OutOfRange("need alpha > -n and p >= 1")
    if alpha < p - n - BOUNDARY_TOL:
        return True
    return p == 1 and abs(alpha - (1 - n)) <= BOUNDARY_TOL and beta >= 0


POSITIVITY_EXPONENTS = (0, 1, 2, 4, 8, 16, 32, 64, 128, 256, 300)


def point_capacity_positive(W: RadialWeight, p: float, r: float = 1.0, rel_threshold: float = 1e-12):
    """Numeric test of cap({0}, B_r) > 0 from shrinking annuli.

    Inner radii are exp(-10**k) for k in ``POSITIVITY_EXPONENTS``; the point
    counts as having positive capacity when the innermost annulus still
    has capacity above ``rel_threshold * mu(B_r) / r**p``.  Returns
    ``(positive, log_capacities)``.
    """
    x = math.log(r)
    logs = [log_annulus_capacity(W, p, -(10.0**k), x) for k in POSITIVITY_EXPONENTS]
    floor = math.log(rel_threshold) + lattice_log_mu(W, np.array([x]))[0] - p * x
    return bool(logs[-1] > floor), logs
