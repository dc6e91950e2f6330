"""Weighted measures of balls, doubling constants and decay exponents."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import betainc

from .errors import WindowTooNarrow
from .quadrature import log_integral, log_powlog_integral, tanh_sinh
from .weights import RadialWeight, log_phi

log = logging.getLogger(__name__)

LN2 = math.log(2.0)
TAU_QUAD = 1e-10


def _log(r: float) -> float:
    return -math.inf if r == 0 else math.log(r)


def log_mu_ball(W: RadialWeight, r: float | None = None, *, log_r: float | None = None) -> float:
    """log mu(B_r) for the centered ball; pass ``log_r`` for radii below float range."""
    x = _log(r) if log_r is None else log_r
    return log_integral(W, 1.0, -math.inf, x)


def mu_ball(W: RadialWeight, r: float) -> float:
    """mu(B_r) = integral_0^r w_hat."""
    if not r > 0:
        raise ValueError("r must be positive")
    return math.exp(log_mu_ball(W, r))


def mu_annulus(W: RadialWeight, r_inner: float, r_outer: float) -> float:
    return math.exp(log_integral(W, 1.0, _log(r_inner), _log(r_outer)))


def cap_fraction(n: int, t: float, r: float, rho):
    """Fraction of the sphere |x| = rho lying in a ball B(z, r) with |z| = t."""
    rho = np.asarray(rho, dtype=float)
    if t == 0:
        return (rho < r).astype(float)
    if n == 1:
        return 0.5 * ((np.abs(rho - t) < r).astype(float) + (rho + t < r).astype(float))
    # (1 - cos theta*) / 2 without cancellation
    # scaled by t so that tiny radii do not underflow
    k, b = r / t, rho / t
    x = (k - 1.0 + b) * (k + 1.0 - b) / (4.0 * b)
    x = np.clip(x, 0.0, 1.0)
    a = 0.5 * (n - 1)
    return betainc(a, a, x)


def log_ball_integral(W: RadialWeight, s: float, t: float, r: float) -> float:
    """log of integral over B(z, r), |z| = t, of w(x)**s dx."""
    n = W.n
    lw = math.log(W.omega)
    q = (n - 1) * (1.0 - s)
    c = (1.0 - s) * lw
    parts = []
    if t < r:
        parts.append(log_integral(W, s, -math.inf, math.log(r - t), q=q, c=c))
    if t > 0:
        lo, hi = abs(t - r), t + r
        if n == 1:
            parts.append(log_integral(W, s, _log(lo), math.log(hi), q=q, c=c) - LN2)
        else:
            parts.append(_log_shell_integral(W, s, q, c, t, r, lo, hi))
    parts = [p for p in parts if p != -math.inf]
    if not parts:
        return -math.inf
    if any(p == math.inf for p in parts):
        return math.inf
    return float(np.logaddexp.reduce(parts))


def _log_shell_integral(W, s, q, c, t, r, lo, hi):
    """integral_lo^hi exp(c) rho**q w_hat**s * cap_fraction d rho, n >= 2."""
    n = W.n
    parts = []
    cut = lo
    if lo < 1e-6 * hi:
        # near the origin the fraction tends to a constant; integrate that part exactly
        cut = 1e-6 * hi
        frac0 = float(cap_fraction(n, t, r, 0.5 * (lo + cut)))
        inner = log_integral(W, s, _log(lo), math.log(cut), q=q, c=c)
        if inner == math.inf:
            return math.inf
        if frac0 > 0 and inner > -math.inf:
            parts.append(inner + math.log(frac0))
    xs = np.concatenate([[math.log(cut)], W.breakpoints(math.log(cut), math.log(hi)), [math.log(hi)]])
    probe = np.linspace(math.log(cut), math.log(hi), 65)
    M = float(np.max(s * W.log_w_hat(np.concatenate([probe, xs])) + q * np.concatenate([probe, xs]))) + c

    def f(rho):
        return np.exp(s * W.log_w_hat(np.log(rho)) + q * np.log(rho) + c - M) * cap_fraction(n, t, r, rho)

    total = 0.0
    for a, b in zip(xs[:-1], xs[1:]):
        val, _ = tanh_sinh(f, math.exp(a), math.exp(b), rtol=TAU_QUAD)
        total += val
    if total > 0:
        parts.append(M + math.log(total))
    if not parts:
        return -math.inf
    return float(np.logaddexp.reduce(parts))


def mu_offcenter_ball(W: RadialWeight, t: float, r: float) -> float:
    """mu(B(z, r)) for any center z with |z| = t."""
    if t < 0 or not r > 0:
        raise ValueError("need t >= 0 and r > 0")
    return math.exp(log_ball_integral(W, 1.0, t, r))


# ---------------------------------------------------------------------------
# doubling


@dataclass
class DoublingReport:
    constant_estimate: float
    witness: tuple
    grid: list
    verdict: str
    refined_estimate: float

    def to_dict(self):
        return {
            "constant_estimate": self.constant_estimate,
            "refined_estimate": self.refined_estimate,
            "witness": {"t": self.witness[0], "r": self.witness[1]},
            "verdict": self.verdict,
            "grid_size": len(self.grid),
        }


def _doubling_scan(W, lo, hi, points):
    radii = np.logspace(math.log10(lo), math.log10(hi), points)
    centers = np.concatenate([[0.0], radii])
    grid, best, arg = [], -math.inf, None
    for t in centers:
        for r in radii:
            lr = log_ball_integral(W, 1.0, t, 2 * r) - log_ball_integral(W, 1.0, t, r)
            grid.append((float(t), float(r), math.exp(lr)))
            if lr > best:
                best, arg = lr, (float(t), float(r))
    return math.exp(best), arg, grid


def doubling_estimate(W: RadialWeight, window=(1e-3, 1e3), points: int = 7) -> DoublingReport:
    """Max of mu(2B)/mu(B) over centered-on-ray balls; refined once to test stability."""
    lo, hi = window
    if not 0 < lo < hi:
        raise ValueError("window must satisfy 0 < lo < hi")
    C, arg, grid = _doubling_scan(W, lo, hi, points)
    C2, arg2, grid2 = _doubling_scan(W, lo, hi, 2 * points - 1)
    verdict = "doubling" if abs(C2 - C) <= 0.05 * C else "inconclusive"
    if C2 >= C:
        C, arg = C2, arg2
    return DoublingReport(C, arg, grid2, verdict, C2)


# ---------------------------------------------------------------------------
# decay exponent


@dataclass
class ExponentEstimate:
    Q_hat: float
    window: tuple
    slope_samples: list = field(repr=False)
    max_pair: tuple
    saturation: bool
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {
            "Q_hat": self.Q_hat,
            "window": list(self.window),
            "max_pair": {"rho": self.max_pair[0], "r": self.max_pair[1]},
            "saturation": self.saturation,
            "n_samples": len(self.slope_samples),
            "notes": self.notes,
        }


def _lattice(x_lo, x_hi, steps_per_octave):
    d = LN2 / steps_per_octave
    j0 = math.ceil(x_lo / d - 1e-9)
    j1 = math.floor(x_hi / d + 1e-9)
    return np.arange(j0, j1 + 1) * d


def lattice_log_mu(W: RadialWeight, xs: np.ndarray) -> np.ndarray:
    """log mu(B_r) at increasing log radii, accumulated shell by shell."""
    out = np.empty(len(xs))
    out[0] = log_integral(W, 1.0, -math.inf, xs[0])
    for i in range(1, len(xs)):
        out[i] = np.logaddexp(out[i - 1], log_integral(W, 1.0, xs[i - 1], xs[i]))
    return out


def _slopes(x, lm, spo, K, strict_top):
    rows = []
    top = len(x) - 1 if strict_top else len(x)
    for j in range(top):
        for k in range(1, K + 1):
            i = j - k * spo
            if i < 0:
                break
            rows.append((x[i], x[j], (lm[j] - lm[i]) / (x[j] - x[i])))
    return rows


def exponent_estimate(
    W: RadialWeight,
    R0: float,
    r_min: float,
    *,
    R_max: float | None = None,
    K: int = 8,
    steps_per_octave: int = 4,
) -> ExponentEstimate:
    """Sup of log(mu(B_r)/mu(B_rho)) / log(r/rho) over dyadic pairs in (r_min, R0).

    Radii live on the lattice 2**(j/steps_per_octave), so enlarging the
    window only adds pairs.  ``R0 = inf`` needs a finite proxy ``R_max``.
    """
    notes = []
    if R0 == math.inf:
        if R_max is None:
            raise ValueError("R0 = inf needs a finite proxy R_max")
        notes.append(f"R0=inf proxied by R_max={R_max:g}")
        log.info("R0=inf proxied by R_max=%g", R_max)
        top = R_max
    else:
        top = R0
    if not 0 < r_min < top:
        raise ValueError("need 0 < r_min < R0")
    x_lo, x_hi = math.log(r_min), math.log(top)
    xs = _lattice(x_lo, x_hi, steps_per_octave)
    strict = len(xs) and abs(xs[-1] - x_hi) < 1e-12
    lm = lattice_log_mu(W, xs)

    def best(Kk):
        rows = _slopes(xs, lm, steps_per_octave, Kk, strict)
        if len(rows) < 8:
            raise WindowTooNarrow(f"only {len(rows)} radius pairs in window")
        i = int(np.argmax([s for *_, s in rows]))
        return rows, i

    rows, i = best(K)
    rows2, i2 = best(K + 2)
    q1, q2 = rows[i][2], rows2[i2][2]
    saturated = abs(q2 - q1) <= 0.01 * max(abs(q1), 1e-12)
    samples = [(math.exp(a), math.exp(b), s) for a, b, s in rows]
    Q = max(0.0, q1)
    return ExponentEstimate(Q, (r_min, R0), samples, samples[i][:2], bool(saturated), notes)


def deep_probes(x_lo: float, x_hi: float, span: float = 14.0, step: float = 0.25, to_infinity: bool = True):
    """Log radii beyond a window, equally spaced in log|log r|.

    Toward the origin the probes are x = -exp(u) for u from log|x_lo| up to
    ``span`` further; this reaches both power-type and logarithmic decay.
    """
    u0 = math.log(max(1.0, -x_lo))
    below = -np.exp(u0 + step * np.arange(1, int(span / step) + 1))
    below = below[below < x_lo]
    if not to_infinity:
        return below, np.empty(0)
    u1 = math.log(max(1.0, x_hi))
    above = np.exp(u1 + step * np.arange(1, int(span / step) + 1))
    return below, above[above > x_hi]


def _max_rise(g):
    """Largest g[j] - g[i] over i < j."""
    return float(np.max(g - np.minimum.accumulate(g)))


@dataclass
class RiseProfile:
    """log mu(B_r) on a lattice plus refinement probes, for bounded-rise tests."""

    x: np.ndarray
    log_mu: np.ndarray
    n_below: int
    n_above: int

    def trend(self, Q: float) -> float:
        """Slope, against log|log r|, of the largest rise of log mu - Q log r.

        The rise is recomputed as probes are added one at a time beyond the
        lattice; a bounded rise gives a flat trend.
        """
        g = self.log_mu - Q * self.x
        nb, na = self.n_below, self.n_above
        nw = len(g) - nb - na
        out = []
        if nb >= 4:
            rises = np.array([_max_rise(g[nb - j :]) for j in range(1, nb + 1)])
            u = np.log(-self.x[:nb][::-1])
            h = nb // 2
            out.append(float(np.polyfit(u[h:], rises[h:], 1)[0]))
        if na >= 4:
            rises = np.array([_max_rise(g[: nb + nw + j]) for j in range(1, na + 1)])
            u = np.log(self.x[nb + nw :])
            h = na // 2
            out.append(float(np.polyfit(u[h:], rises[h:], 1)[0]))
        return max(out, default=0.0)


def rise_profile(W: RadialWeight, window=(1e-12, 1e6), R0: float = math.inf, steps_per_octave: int = 2) -> RiseProfile:
    lo, hi = window
    hi = min(hi, R0)
    if not hi >= 1e3 * lo:
        raise WindowTooNarrow("need a window of at least 3 decades below R0")
    x_lo, x_hi = math.log(lo), math.log(hi)
    xs = _lattice(x_lo, x_hi, steps_per_octave)
    if R0 < math.inf and xs[-1] < x_hi - 1e-12:
        xs = np.append(xs, x_hi)
    below, above = deep_probes(x_lo, x_hi, to_infinity=R0 == math.inf)
    allx = np.concatenate([below[::-1], xs, above])
    return RiseProfile(allx, lattice_log_mu(W, allx), len(below), len(above))


@dataclass
class DecayExponent:
    Q_hat: float
    window: tuple
    R0: float
    slope_threshold: float

    def to_dict(self):
        return {
            "Q_hat": self.Q_hat,
            "window": list(self.window),
            "R0": "inf" if self.R0 == math.inf else self.R0,
            "slope_threshold": self.slope_threshold,
        }


def decay_exponent(
    W: RadialWeight,
    window=(1e-12, 1e6),
    R0: float = math.inf,
    *,
    slope_threshold: float = 0.05,
    steps_per_octave: int = 2,
    tol: float = 1e-4,
) -> DecayExponent:
    """Infimal Q with mu(B_rho)/mu(B_r) >~ (rho/r)**Q for rho < r < R0.

    Bisects on Q for the boundary between a flat and a growing rise trend
    (see :meth:`RiseProfile.trend`).  Unlike the largest dyadic slope this
    ignores bounded bumps, such as those logarithmic factors produce near
    radius 1/e.
    """
    prof = rise_profile(W, window, R0, steps_per_octave)
    x, lm = prof.x, prof.log_mu
    top = float(np.max(np.diff(lm) / np.diff(x))) + 1.0

    def grows(Q):
        return prof.trend(Q) > slope_threshold

    if not grows(0.0):
        return DecayExponent(0.0, tuple(window), R0, slope_threshold)
    lo, hi = 0.0, top
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if grows(mid):
            lo = mid
        else:
            hi = mid
    return DecayExponent(hi, tuple(window), R0, slope_threshold)


def lower_exponent_fit(W: RadialWeight, r_min: float, r_max: float, steps_per_octave: int = 4) -> float:
    """Exponent s with mu(B_r) >~ r**s on (r_min, r_max).

    Fits a line through the interior vertices of the lower convex hull of
    (log r, log mu(B_r)); those are the radii where mu is smallest relative
    to any power of r.
    """
    xs = _lattice(math.log(r_min), math.log(r_max), steps_per_octave)
    ys = lattice_log_mu(W, xs)
    hull = []
    for p in zip(xs, ys):
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) <= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    inner = hull[1:-1] if len(hull) > 3 else hull
    hx, hy = np.array(inner).T
    return float(np.polyfit(hx, hy, 1)[0])


# ---------------------------------------------------------------------------
# power-log integral asymptotics


@dataclass
class LogPowerIntegral:
    cls: str
    representative: float
    numeric: float


def log_power_integral(a: float, b: float, r: float) -> LogPowerIntegral:
    """Asymptotic class and value of integral_0^r rho**(a-1) phi(rho)**b d rho."""
    if a > 0:
        cls, rep = "power_log", r**a * math.exp(b * float(log_phi(math.log(r))))
    elif a == 0 and b < -1:
        if r <= 1:
            cls, rep = "log_power", math.exp((b + 1) * float(log_phi(math.log(r))))
        else:
            cls, rep = "one_plus_log", 1.0 + math.log(r)
    else:
        return LogPowerIntegral("divergent", math.inf, math.inf)
    return LogPowerIntegral(cls, rep, math.exp(log_rho_phi_integral(a, b, r)))


def log_rho_phi_integral(a: float, b: float, r: float) -> float:
    """log integral_0^r rho**(a-1) phi(rho)**b d rho by direct quadrature."""
    x = math.log(r)
    # phi = -log rho below 1/e: rho = exp(-sigma), d rho = -exp(-sigma) d sigma
    low = log_powlog_integral(a, b, max(1.0, -x), math.inf)
    if x <= -1:
        return low
    if abs(a) < 1e-12:
        up = math.log(x + 1.0)
    else:
        up = a * x - math.log(a) + math.log(-math.expm1(-a * (x + 1.0))) if a > 0 else math.log(
            (math.exp(-a) - math.exp(a * x)) / -a
        )
    return float(np.logaddexp(low, up))
