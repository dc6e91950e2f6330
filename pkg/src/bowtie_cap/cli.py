"""Command-line front end: ``bowtie-cap <command> [flags]``.

Commands
    capacity    capacity of a centered annulus (or of the origin)
    measure     mu of a ball, centered or off-center, optional Monte-Carlo check
    ap-check    Muckenhoupt scan of the line weight or of w on R^n
    exponent    decay exponent of mu on a radius window
    decide      p-Poincare decision on the bow-tie with every route
    reproduce   scripted reproductions (ex-4.2, ex-6.2, powerlog-table)

Every report is wrapped in an envelope carrying ``schema_version``, the
artifact version, the seed and the full configuration.  Exit codes: 0 ok,
1 reproduction mismatch, 2 invalid input, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import re
import sys

import numpy as np

from . import __version__, measure
from .capacity import (
    CapacityQuery,
    capacity_condition_check,
    discrete_capacity_oracle,
    domain_factor,
    log_annulus_capacity,
)
from .decider import DecideConfig, decide_bowtie_pi
from .errors import ReproductionMismatch
from .measure import decay_exponent, exponent_estimate, log_ball_integral, log_mu_ball
from .muckenhoupt import SPACES, ApScanConfig, ap_scan
from .parallel import thread_count
from .recipes import RECIPES, run as run_recipe
from .weights import build_weight, load_weight

SCHEMA_VERSION = "1"
LOG2 = math.log(2.0)
EXIT_OK, EXIT_MISMATCH, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2, 3



# ---------------------------------------------------------------------------
# parsing helpers

_POW2 = re.compile(r"^\s*2\s*(\^|\*\*)\s*([-+]?[0-9.eE+-]+)\s*$")


def parse_radius(text: str) -> float:
    """Natural log of a radius given as a number, ``2^k`` / ``2**k``, ``0`` or ``inf``."""
    m = _POW2.match(text)
    if m:
        return float(m.group(2)) * LOG2
    v = float(text)
    if v < 0 or math.isnan(v):
        raise argparse.ArgumentTypeError(f"radius must be >= 0, got {text!r}")
    if v == 0:
        return -math.inf
    return math.log(v)


def _radius_arg(text):
    try:
        return parse_radius(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a radius: {text!r}") from None


def _window_radius(text):
    """A positive linear radius; accepts the same forms as ``parse_radius``."""
    x = _radius_arg(text)
    v = math.exp(x) if x < 709 else math.inf
    if not 0 < v < math.inf:
        raise argparse.ArgumentTypeError(f"window radius must be positive and representable, got {text!r}")
    return v


def _positive(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text!r}")
    return v


def _radius_fields(name: str, x: float) -> dict:
    """A log radius reported in linear and log2 form."""
    return {name: math.exp(x) if x < 709 else math.inf, f"{name}_log2": x / LOG2}


# ---------------------------------------------------------------------------
# weights


def weight_from_args(a):
    if a.spec:
        return load_weight(a.spec)
    if not a.family:
        raise ValueError("give a weight with --family or --spec")
    spec = {"family": a.family, "n": a.n}
    if a.family == "power_log":
        spec.update(alpha=a.alpha, beta=a.beta)
    elif a.family == "dyadic_staircase" and a.depth is not None:
        spec["depth"] = a.depth
    elif a.family not in ("constant", "dyadic_staircase"):
        raise ValueError(f"family {a.family!r} needs a --spec file")
    return build_weight(spec)


# ---------------------------------------------------------------------------
# commands


def cmd_capacity(a, W):
    lo, hi = a.inner, a.outer
    if not hi > lo:
        raise ValueError("need inner < outer")
    CapacityQuery(a.p, 0.0, 1.0, a.domain)  # validates p and domain
    lv = log_annulus_capacity(W, a.p, lo, hi, a.domain)
    out = {"value": math.exp(lv), "log_value": lv, "p": a.p, "domain": a.domain}
    out.update(_radius_fields("inner", lo))
    out.update(_radius_fields("outer", hi))
    out["method"] = "closed_form_essinf" if a.p == 1 else "closed_form_dual_integral"
    if lv == -math.inf:
        out["reason"] = "vanishing essential infimum" if a.p == 1 else "divergent dual integral"
    if a.oracle:
        if lo == -math.inf:
            raise ValueError("the discrete oracle needs a positive inner radius")
        orc = discrete_capacity_oracle(W, a.p, math.exp(lo), math.exp(hi), N=a.N, domain=a.domain)
        out["oracle"] = {"value": orc, "N": a.N, "relative_difference": abs(orc - out["value"]) / max(out["value"], 1e-300)}
    out["domain_factor"] = domain_factor(W.n, a.domain)
    return out


def _mc_ball(W, t, r, samples, rng):
    """Monte-Carlo mu(B(z, r)), |z| = t, by uniform sampling of the ball."""
    n = W.n
    g = rng.standard_normal((samples, n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    pts = g * (r * rng.random(samples) ** (1.0 / n))[:, None]
    pts[:, 0] += t
    rho = np.linalg.norm(pts, axis=1)
    with np.errstate(divide="ignore"):
        vals = W.w(rho)
    vol = W.omega / n * r**n
    est = vol * float(np.mean(vals))
    err = vol * float(np.std(vals)) / math.sqrt(samples)
    return est, err


def cmd_measure(a, W):
    x = a.radius
    out = {}
    out.update(_radius_fields("radius", x))
    if a.center is None:
        lm = log_mu_ball(W, log_r=x)
        out.update({"center": 0.0, "mu": math.exp(lm), "log_mu": lm})
    else:
        t, r = a.center, math.exp(x)
        lm = log_ball_integral(W, 1.0, t, r)
        out.update({"center": t, "mu": math.exp(lm), "log_mu": lm})
    if a.mc_samples:
        rng = np.random.default_rng(a.seed)
        est, err = _mc_ball(W, a.center or 0.0, math.exp(x), a.mc_samples, rng)
        out["monte_carlo"] = {"estimate": est, "std_error": err, "samples": a.mc_samples, "seed": a.seed}
    return out


def _scan_config(a):
    return ApScanConfig(window=(a.r_min, a.r_max), steps_per_decade=a.steps_per_decade)


def cmd_ap_check(a, W):
    rep = ap_scan(W, a.p, a.space, _scan_config(a))
    d = rep.to_dict()
    if not a.profile:
        d.pop("profile")
    return d


def cmd_exponent(a, W):
    est = exponent_estimate(W, a.R0, a.r_min, R_max=a.r_max if a.R0 == math.inf else None)
    dec = decay_exponent(W, (a.r_min, a.r_max), a.R0)
    out = {"dyadic": est.to_dict(), "bounded_rise": dec.to_dict()}
    if a.p is not None:
        cc = capacity_condition_check(W, a.p, (a.r_min, min(a.r_max, a.R0)), F=a.F, to_infinity=a.R0 == math.inf)
        out["capacity_condition"] = cc.to_dict()
    return out


def cmd_decide(a, W):
    cfg = DecideConfig(
        delta_Q=a.delta_Q,
        r_min=a.r_min,
        R0=a.R0,
        R_max=a.r_max,
        F=a.F,
        scan=ApScanConfig(window=(a.scan_r_min, a.scan_r_max), steps_per_decade=a.steps_per_decade),
    )
    return decide_bowtie_pi(W, a.p, cfg).to_dict()


def cmd_reproduce(a, W=None):
    bundle = run_recipe(a.recipe)
    if not bundle["passed"]:
        raise ReproductionMismatch([c for c in bundle["claims"] if not c["pass"]], bundle)
    return bundle


COMMANDS = {
    "capacity": cmd_capacity,
    "measure": cmd_measure,
    "ap-check": cmd_ap_check,
    "exponent": cmd_exponent,
    "decide": cmd_decide,
    "reproduce": cmd_reproduce,
}


# ---------------------------------------------------------------------------
# output


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings, numpy scalars plain."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, obj


def _fmt(v, digits=None):
    if isinstance(v, float):
        return f"{v:.{digits}g}" if digits else repr(v)
    if v is None:
        return ""
    return str(v)


def render(report: dict, fmt: str) -> str:
    clean = _clean(report)
    if fmt == "json":
        return json.dumps(clean, indent=2)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value"])
        for k, v in flatten(clean):
            w.writerow([k, _fmt(v)])
        return buf.getvalue().rstrip("\n")
    return "\n".join(f"{k}: {_fmt(v, 6)}" for k, v in flatten(clean))


def envelope(a, result) -> dict:
    config = {k: v for k, v in vars(a).items() if k not in ("func",)}
    for key in ("inner", "outer", "radius"):
        if key in config and config[key] is not None:
            config.pop(key)
            config.update(_radius_fields(key, getattr(a, key)))
    config["threads"] = thread_count()
    config["tau_quad"] = measure.TAU_QUAD
    return {
        "schema_version": SCHEMA_VERSION,
        "artifact_version": __version__,
        "command": a.command,
        "seed": a.seed,
        "config": config,
        "result": result,
    }


# ---------------------------------------------------------------------------
# argument parser


def _r0(text):
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    return _window_radius(text)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bowtie-cap", description="Potential theory for radial weights on the bow-tie.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("weight")
    g.add_argument("--family", choices=["power_log", "constant", "dyadic_staircase", "piecewise", "tabulated"])
    g.add_argument("--spec", help="JSON weight spec file")
    g.add_argument("--n", type=int, default=2, help="dimension (default 2)")
    g.add_argument("--alpha", type=float, default=0.0)
    g.add_argument("--beta", type=float, default=0.0)
    g.add_argument("--depth", type=int, help="staircase levels")
    o = common.add_argument_group("output")
    o.add_argument("--format", choices=["json", "csv", "text"], default="json")
    o.add_argument("--output", help="write the report here instead of stdout")
    o.add_argument("--seed", type=int, default=0, help="seed for Monte-Carlo checks (recorded in every report)")
    o.add_argument("--tau-quad", type=_positive, default=measure.TAU_QUAD, help="relative tolerance of ball quadrature")
    o.add_argument("-v", "--verbose", action="store_true")

    window = argparse.ArgumentParser(add_help=False)
    window.add_argument("--r-min", type=_window_radius, default=1e-12)
    window.add_argument("--r-max", type=_window_radius, default=1e6)
    window.add_argument("--R0", type=_r0, default=math.inf, help="outer scale, a number or 'inf'")
    window.add_argument("--F", type=_positive, default=1e3, help="capacity ratio spread tolerance")

    s = sub.add_parser("capacity", parents=[common], help="annulus or point capacity")
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--inner", type=_radius_arg, default=-math.inf, help="inner radius (0 for the origin)")
    s.add_argument("--outer", type=_radius_arg, required=True)
    s.add_argument("--domain", choices=["full", "quadrant", "bowtie"], default="full")
    s.add_argument("--oracle", action="store_true", help="also run the discrete oracle")
    s.add_argument("--N", type=int, default=2**14, help="oracle grid size")

    s = sub.add_parser("measure", parents=[common], help="mu of a ball")
    s.add_argument("--radius", type=_radius_arg, required=True)
    s.add_argument("--center", type=float, help="distance of the center from the origin")
    s.add_argument("--mc-samples", type=int, default=0)

    s = sub.add_parser("ap-check", parents=[common], help="Muckenhoupt scan")
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--space", choices=SPACES, default="line_wtilde")
    s.add_argument("--r-min", type=_window_radius, default=1e-6)
    s.add_argument("--r-max", type=_window_radius, default=1e6)
    s.add_argument("--steps-per-decade", type=int, default=2)
    s.add_argument("--profile", action="store_true", help="include the per-scale profile")

    s = sub.add_parser("exponent", parents=[common, window], help="decay exponent")
    s.add_argument("--p", type=float, help="also check the capacity condition at this p")

    s = sub.add_parser("decide", parents=[common, window], help="bow-tie p-Poincare decision")
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--delta-Q", type=_positive, default=0.05)
    s.add_argument("--scan-r-min", dest="scan_r_min", type=_window_radius, default=1e-6)
    s.add_argument("--scan-r-max", dest="scan_r_max", type=_window_radius, default=1e6)
    s.add_argument("--steps-per-decade", type=int, default=2)

    s = sub.add_parser("reproduce", parents=[common], help="run a scripted reproduction")
    s.add_argument("recipe", choices=RECIPES)
    return ap


def _emit(text, path):
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def main(argv=None) -> int:
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as exc:  # usage errors (2), --help and --version (0)
        return exc.code if isinstance(exc.code, int) else EXIT_INVALID
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        thread_count()
        measure.TAU_QUAD = a.tau_quad
        W = None if a.command == "reproduce" else weight_from_args(a)
        result = COMMANDS[a.command](a, W)
    except ReproductionMismatch as exc:
        _emit(render(envelope(a, exc.bundle), a.format), a.output)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except (ArithmeticError, OverflowError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, TypeError, OSError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    _emit(render(envelope(a, result), a.format), a.output)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
