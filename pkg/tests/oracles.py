"""Independent reference computations.

Nothing here imports the package: weights are evaluated from their
defining formulas and integrals are done by brute force (trapezoid on a
dense log grid, mpmath quadrature or Monte Carlo).  Running this module
regenerates ``frozen_values.json``; the test suite only reads that file, so
the references cannot drift with the implementation.
"""

import json
import math
from pathlib import Path

import mpmath as mp
import numpy as np

FROZEN = Path(__file__).with_name("frozen_values.json")


def staircase_w(rho):
    """w for the dyadic staircase straight from its definition.

    alpha_k = 2**-2**k, beta_k = alpha_k**1.5; w = alpha_{k+1} on
    [alpha_{k+1}, beta_k], rho**2/alpha_k on [beta_k, alpha_k], rho for
    rho >= 1/2.
    """
    rho = np.asarray(rho, dtype=float)
    out = np.array(rho, copy=True)
    for k in range(0, 9):
        a_k = 2.0 ** -(2.0**k)
        b_k = a_k**1.5
        a_next = 2.0 ** -(2.0 ** (k + 1))
        mid = (rho >= b_k) & (rho < a_k)
        low = (rho >= a_next) & (rho < b_k)
        out = np.where(mid, rho**2 / a_k, out)
        out = np.where(low, a_next, out)
    return out


def staircase_mu_trapezoid(r, nodes=10**6):
    """mu(B_r) for the n = 2 staircase by the trapezoid rule in log rho."""
    # the mass below alpha_6 = 2**-64 is ~1e-57 relative; starting there keeps
    # the step small enough for ~1e-9 accuracy
    lo = math.log(2.0**-64)
    x = np.linspace(lo, math.log(r), nodes)
    rho = np.exp(x)
    f = 2 * math.pi * staircase_w(rho) * rho * rho  # w_hat * d rho / d x
    return float(np.trapezoid(f, x) if hasattr(np, "trapezoid") else np.trapz(f, x))


def staircase_mu_exact(K, n_levels=8, dps=40):
    """mu(B_{alpha_K}) for n = 2 as an exact sum over staircase pieces."""
    mp.mp.dps = dps
    two = mp.mpf(2)
    tot = mp.mpf(0)
    for k in range(K, K + n_levels):
        a = two ** -(two**k)
        b = a ** mp.mpf(1.5)
        a_next = two ** -(two ** (k + 1))
        tot += 2 * mp.pi * (a**4 - b**4) / (4 * a)
        tot += mp.pi * a_next * (b**2 - a_next**2)
    return float(tot)


def offcenter_power_ball(alpha, t, r, dps=20):
    """integral of |x|**alpha over the disc of radius r centered at (t, 0), t > r."""
    mp.mp.dps = dps

    def inner(rho):
        # angular half-width of the circle |x| = rho inside the disc
        c = (rho * rho + t * t - r * r) / (2 * rho * t)
        return 2 * mp.acos(c) * rho ** (alpha + 1)

    return float(mp.quad(inner, [t - r, t, t + r]))


def offcenter_power_ball_mc(alpha, t, r, samples=10**7, seed=12345):
    rng = np.random.default_rng(seed)
    total, chunk, done = 0.0, 10**6, 0
    while done < samples:
        m = min(chunk, samples - done)
        th = rng.random(m) * 2 * math.pi
        rr = r * np.sqrt(rng.random(m))
        x = t + rr * np.cos(th)
        y = rr * np.sin(th)
        total += float(np.sum(np.hypot(x, y) ** alpha))
        done += m
    return math.pi * r * r * total / samples


def powerlog_point_capacity(n, alpha, beta, p, r, dps=30):
    """(integral_0^r w_hat**(1/(1-p)))**(1-p) with phi = max(1, -log rho)."""
    mp.mp.dps = dps
    om = 2 * mp.pi ** (mp.mpf(n) / 2) / mp.gamma(mp.mpf(n) / 2)
    s = 1 / (1 - mp.mpf(p))

    def f(sig):
        # rho = exp(-sig), d rho = rho d sig
        rho = mp.e**-sig
        phi = max(1, sig)
        return (om * rho ** (alpha + n - 1) * phi**beta) ** s * rho

    return float(_sigma_quad(f, r) ** (1 - mp.mpf(p)))


def rho_phi_integral(a, b, r, dps=30):
    """integral_0^r rho**(a-1) phi(rho)**b d rho."""
    mp.mp.dps = dps

    def f(sig):
        return mp.e ** (-a * sig) * max(1, sig) ** b

    return float(_sigma_quad(f, r))


def _sigma_quad(f, r):
    """integral over sig in (-log r, inf), split where phi has its kink."""
    s0 = -mp.log(r)
    pts = [s0, 1, mp.inf] if s0 < 1 else [s0, mp.inf]
    return mp.quad(f, pts)


def build():
    vals = {
        "staircase_mu_alpha3": staircase_mu_trapezoid(2.0**-8),
        "staircase_mu_alpha3_exact": staircase_mu_exact(3),
        "offcenter_alpha1_t4_r1": offcenter_power_ball(1.0, 4.0, 1.0),
        "offcenter_alpha1_t4_r1_mc": offcenter_power_ball_mc(1.0, 4.0, 1.0),
        "powerlog_2_0_2_p2_r0.1": powerlog_point_capacity(2, 0.0, 2.0, 2.0, 0.1),
        "powerlog_2_-1.5_0_p2_r1": powerlog_point_capacity(2, -1.5, 0.0, 2.0, 1.0),
        "powerlog_3_-1_1_p2.5_r0.5": powerlog_point_capacity(3, -1.0, 1.0, 2.5, 0.5),
        "powerlog_1_0.2_-1_p1.5_r2": powerlog_point_capacity(1, 0.2, -1.0, 1.5, 2.0),
        "rho_phi_0_-2_0.1": rho_phi_integral(0.0, -2.0, 0.1),
        "rho_phi_1.5_2_0.01": rho_phi_integral(1.5, 2.0, 0.01),
        "rho_phi_0.5_-3_3": rho_phi_integral(0.5, -3.0, 3.0),
    }
    return vals


if __name__ == "__main__":
    vals = build()
    FROZEN.write_text(json.dumps(vals, indent=2) + "\n")
    print(json.dumps(vals, indent=2))
