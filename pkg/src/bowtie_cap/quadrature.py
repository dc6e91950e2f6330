"""Log-space integration of piecewise power-log densities.

The workhorse is :func:`log_integral`, which returns

    log  integral_{e^lo}^{e^hi} exp(c) * rho**q * w_hat(rho)**s  d rho

for a weight's piece table.  Pure power pieces integrate in closed form;
pieces carrying a phi(rho)**b factor are mapped by rho = exp(-sigma),
sigma = exp(y) and integrated with QUADPACK over the window where the
log-integrand is within 60 nats of its maximum.  Divergent integrals return
``inf``; empty ones ``-inf``.

:func:`tanh_sinh` is a small double-exponential rule used for the
off-center ball integrals, whose integrands have square-root behaviour at
both endpoints.
"""

from __future__ import annotations

import functools
import math
import warnings

import numpy as np
from scipy import integrate, optimize

from .errors import QuadratureFailure

EXP_EPS = 1e-12  # exponents closer than this to zero are treated as zero
SNAP = 1e-10  # relative tolerance for exact cancellation of affine scale terms
TAIL_NATS = 60.0
STEEP = 1e8  # endpoint log-slope above which the Laplace term is exact to 1e-8


def lse(values) -> float:
    """log(sum(exp(values))) for a short sequence; -inf when empty."""
    vals = [float(v) for v in values]
    if not vals:
        return -math.inf
    m = max(vals)
    if m == -math.inf or m == math.inf:
        return m
    return m + math.log(math.fsum(math.exp(v - m) for v in vals))


def _snap(v, *terms):
    ref = sum(np.abs(t) for t in terms)
    return np.where(np.abs(v) <= SNAP * ref, 0.0, v)


def _log1mexp(z):
    """log(1 - exp(z)) for z <= 0."""
    z = np.asarray(z, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(z > -LN2_, np.log(-np.expm1(z)), np.log1p(-np.exp(z)))


LN2_ = math.log(2.0)


def log_integral(W, s: float, lo: float, hi: float, q: float = 0.0, c: float = 0.0) -> float:
    """log of the integral of exp(c) rho**q w_hat**s over (e^lo, e^hi)."""
    if not hi > lo:
        return -math.inf
    P = W.pieces
    plo, phi_ = P.lo, W._hi
    tol = _edge_tol(plo)
    tolh = _edge_tol(phi_)
    sel = np.nonzero((phi_ > lo + tolh) & (plo < hi - tol))[0]
    if sel.size == 0:
        return -math.inf

    L = P.scale[sel]
    keep_lo = lo <= plo[sel] + tol[sel]
    keep_hi = hi >= phi_[sel] - tolh[sel]
    lo_u = np.where(keep_lo, P.lo_u[sel], lo)
    lo_v = np.where(keep_lo, P.lo_v[sel], 0.0)
    hi_u = np.where(keep_hi, P.hi_u[sel], hi)
    hi_v = np.where(keep_hi, P.hi_v[sel], 0.0)
    Cu = s * P.c_u[sel] + c
    Cv = s * P.c_v[sel]
    e = s * P.k[sel] + q
    m = np.where(np.abs(e + 1.0) < EXP_EPS, 0.0, e + 1.0)
    bp = s * P.b[sel]

    out = np.full(sel.size, -math.inf)
    plain = bp == 0.0
    if np.any(plain):
        out[plain] = _log_power_pieces(
            lo_u[plain], lo_v[plain], hi_u[plain], hi_v[plain],
            Cu[plain], Cv[plain], L[plain], m[plain],
        )
    for j in np.nonzero(~plain)[0]:
        # b != 0 only on pieces inside (0, 1/e], which carry no affine scale
        C = Cu[j]
        out[j] = C + log_powlog_integral(m[j], bp[j], -hi_u[j], -lo_u[j])
    if np.any(out == math.inf):
        return math.inf
    return lse(out)


def _edge_tol(x):
    return np.where(np.isfinite(x), 1e-15 * np.maximum(1.0, np.abs(x)), 0.0)


def _log_power_pieces(lo_u, lo_v, hi_u, hi_v, Cu, Cv, L, m):
    """Vectorized log of integral exp(C) rho**(m-1) over pieces."""
    with np.errstate(invalid="ignore", over="ignore"):
        d_u = hi_u - lo_u
        d_v = hi_v - lo_v
        D = np.where(d_v == 0.0, d_u, d_u + _snap(d_v, hi_v, lo_v) * L)
        th_v = _snap(Cv + m * hi_v, Cv, m * hi_v)
        tl_v = _snap(Cv + m * lo_v, Cv, m * lo_v)
        Th = Cu + m * hi_u + th_v * L
        Tl = Cu + m * lo_u + tl_v * L
        # Tl/Th may be nan when m == 0 and an endpoint is infinite
        res = np.full(m.shape, math.inf)
        pos = m > 0
        neg = m < 0
        zer = m == 0
        lo_inf = np.isneginf(lo_u)
        hi_inf = np.isposinf(hi_u)

        a = pos & ~hi_inf
        res[a] = np.where(
            lo_inf[a],
            Th[a] - np.log(m[a]),
            Th[a] + _log1mexp(-m[a] * D[a]) - np.log(m[a]),
        )
        b = neg & ~lo_inf
        res[b] = np.where(
            hi_inf[b],
            Tl[b] - np.log(-m[b]),
            Tl[b] + _log1mexp(m[b] * D[b]) - np.log(-m[b]),
        )
        z = zer & ~lo_inf & ~hi_inf
        cz_v = _snap(Cv[z], Cv[z])
        res[z] = Cu[z] + cz_v * L[z] + np.log(D[z])
    return res


@functools.lru_cache(maxsize=1 << 16)
def log_powlog_integral(m: float, bp: float, sa: float, sb: float) -> float:
    """log of integral_{sa}^{sb} exp(-m sigma) sigma**bp d sigma, 1 <= sa < sb <= inf."""
    if not sb > sa:
        return -math.inf
    e1 = bp + 1.0
    if abs(m) < EXP_EPS:
        if abs(e1) < EXP_EPS:
            return math.log(math.log(sb) - math.log(sa)) if sb < math.inf else math.inf
        if e1 > 0:
            if sb == math.inf:
                return math.inf
            return e1 * math.log(sb) + float(_log1mexp(e1 * (math.log(sa) - math.log(sb)))) - math.log(e1)
        lb = math.log(sb) if sb < math.inf else math.inf
        return e1 * math.log(sa) + float(_log1mexp(e1 * (lb - math.log(sa)))) - math.log(-e1)
    if sb == math.inf and m < 0:
        return math.inf

    ya = math.log(sa)
    yb = math.log(sb) if sb < math.inf else math.inf

    def h(y):
        return -m * math.exp(y) + e1 * y if y != math.inf else -math.inf

    ystar = math.log(e1 / m) if e1 / m > 0 else None
    if m > 0:
        # concave: unimodal with the peak at the clamped stationary point
        yp = ya if ystar is None else min(max(ystar, ya), yb)
        M = float(h(yp))
        T = M - TAIL_NATS
        y1 = ya if h(ya) >= T else optimize.brentq(lambda y: h(y) - T, ya, yp)
        if yb < math.inf and h(yb) >= T:
            y2 = yb
        else:
            step = 1.0
            top = yp + step
            while h(top) >= T:
                step *= 2.0
                top = yp + step
            top = min(top, yb)
            y2 = optimize.brentq(lambda y: h(y) - T, yp, top)
        parts = [(y1, y2)]
    else:
        # convex: maxima at the endpoints
        M = max(float(h(ya)), float(h(yb)))
        T = M - TAIL_NATS
        ym = ya if ystar is None else min(max(ystar, ya), yb)
        if h(ym) >= T:
            parts = [(ya, yb)]
        else:
            parts = []
            if h(ya) >= T:
                parts.append((ya, optimize.brentq(lambda y: h(y) - T, ya, ym)))
            if h(yb) >= T:
                parts.append((optimize.brentq(lambda y: h(y) - T, ym, yb), yb))

    def dh(y):
        return -m * math.exp(y) + e1

    total = 0.0
    for y1, y2 in parts:
        # an endpoint maximum this steep is resolved by its Laplace term e^h/|h'|
        if y1 == ya and h(ya) >= h(y2) and abs(dh(ya)) > STEEP:
            total += math.exp(h(ya) - M) / abs(dh(ya))
            continue
        if y2 == yb and h(yb) >= h(y1) and abs(dh(yb)) > STEEP:
            total += math.exp(h(yb) - M) / abs(dh(yb))
            continue
        if y2 <= y1:
            continue
        with warnings.catch_warnings():
            # the returned error estimate is checked below
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, err = integrate.quad(lambda y: math.exp(h(y) - M), y1, y2, epsabs=0.0, epsrel=1e-12, limit=200)
        if err > 1e-8 * max(val, 1e-300):
            raise QuadratureFailure(f"power-log quadrature: err={err:.3g} val={val:.3g}")
        total += val
    if total <= 0:
        return -math.inf
    return M + math.log(total)


def tanh_sinh(f, a: float, b: float, rtol: float = 1e-10, max_level: int = 9):
    """Double-exponential quadrature of a vectorized ``f`` over [a, b].

    Returns ``(value, error_estimate)``; raises :class:`QuadratureFailure`
    when successive levels never agree to ``rtol``.
    """
    if not b > a:
        return 0.0, 0.0
    half = 0.5 * (b - a)
    prev = None
    for level in range(2, max_level + 1):
        hstep = 2.0 ** (-level)
        t = np.arange(0.0, 3.2 + hstep / 2, hstep)
        u = 0.5 * math.pi * np.sinh(t)
        d = 1.0 / (np.exp(u) * np.cosh(u))  # 1 - tanh(u)
        wt = 0.5 * math.pi * np.cosh(t) / np.cosh(u) ** 2
        ok = d > 0
        t, d, wt = t[ok], d[ok], wt[ok]
        x_right = b - half * d
        x_left = a + half * d[1:]
        x_mid_right = x_right
        vals_r = f(x_mid_right)
        vals_l = f(x_left)
        total = half * hstep * (np.sum(wt * vals_r) + np.sum(wt[1:] * vals_l))
        if prev is not None:
            err = abs(total - prev)
            if err <= rtol * abs(total) or total == 0.0:
                return float(total), float(err)
        prev = total
    raise QuadratureFailure(f"tanh-sinh did not converge on [{a}, {b}]: last change {err:.3g}")
