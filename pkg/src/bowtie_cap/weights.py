"""Radial weight families and their derived profiles.

Every weight is compiled into a table of pieces on which the radialized
density has the form

    w_hat(rho) = exp(c) * rho**k * phi(rho)**b,    phi(rho) = max(1, -log rho),

with piece endpoints kept as natural-log radii.  Staircase radii such as
2**(-2**600) cannot be stored as floats, and their logs are so large that
products like ``s * c + m * log(rho)`` cancel catastrophically, so every
log-quantity in the table is stored in affine form ``u + v * L`` with one
scale ``L`` per piece.  Cancellation then happens in the small coefficient
``v`` where it is exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import MalformedSpec, NonIntegrable

LN2 = math.log(2.0)
FAMILIES = ("power_log", "dyadic_staircase", "piecewise", "tabulated")
DEFAULT_STAIRCASE_DEPTH = 1000


def sphere_area(n: int) -> float:
    """Surface area of the unit (n-1)-sphere in R^n (2 when n == 1)."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def log_phi(x):
    """log of phi(rho) = max(1, -log rho), as a function of x = log rho."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return np.log(np.maximum(1.0, -x))


@dataclass(frozen=True, eq=False)
class PieceTable:
    """Column arrays describing the pieces of log w_hat, ordered by radius.

    Endpoint and coefficient logs are ``u + v * scale``.  ``k`` is the power
    of rho and ``b`` the power of phi; ``b`` is nonzero only on pieces lying
    inside (0, 1/e].
    """

    lo_u: np.ndarray
    lo_v: np.ndarray
    hi_u: np.ndarray
    hi_v: np.ndarray
    c_u: np.ndarray
    c_v: np.ndarray
    scale: np.ndarray
    k: np.ndarray
    b: np.ndarray

    @property
    def lo(self) -> np.ndarray:
        return _ev(self.lo_u, self.lo_v, self.scale)

    @property
    def hi(self) -> np.ndarray:
        return _ev(self.hi_u, self.hi_v, self.scale)

    def __len__(self):
        return len(self.k)

    @classmethod
    def from_rows(cls, rows):
        cols = list(zip(*rows))
        return cls(*(np.array(c, dtype=float) for c in cols))


def _ev(u, v, scale):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    with np.errstate(invalid="ignore"):
        return np.where(v == 0.0, u, u + v * scale)


@dataclass(frozen=True, eq=False)
class RadialWeight:
    """A validated, immutable radial weight on R^n.

    Use :func:`build_weight` or the ``power_log`` / ``dyadic_staircase`` /
    ``piecewise`` / ``tabulated`` constructors rather than instantiating
    this directly.
    """

    n: int
    family: str
    params: dict
    pieces: PieceTable = field(repr=False)
    omega: float = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "omega", sphere_area(self.n))
        object.__setattr__(self, "_hi", self.pieces.hi)
        object.__setattr__(self, "_cache", {})

    # pointwise profiles -------------------------------------------------

    def piece_index(self, x):
        """Index of the piece containing log-radius ``x``."""
        idx = np.searchsorted(self._hi, np.asarray(x, dtype=float), side="left")
        return np.minimum(idx, len(self.pieces) - 1)

    def log_w_hat(self, x):
        """log w_hat at log-radius ``x`` (vectorized)."""
        x = np.asarray(x, dtype=float)
        i = self.piece_index(x)
        P = self.pieces
        c = _ev(P.c_u[i], P.c_v[i], P.scale[i])
        bterm = np.where(P.b[i] == 0.0, 0.0, P.b[i] * log_phi(x))
        return c + P.k[i] * x + bterm

    def log_w(self, x):
        x = np.asarray(x, dtype=float)
        return self.log_w_hat(x) - math.log(self.omega) - (self.n - 1) * x

    def w(self, rho):
        return np.exp(self.log_w(np.log(rho)))

    def w_hat(self, rho):
        return np.exp(self.log_w_hat(np.log(rho)))

    def w_tilde(self, rho):
        """Even line weight |rho|**(n-1) * w(|rho|)."""
        rho = np.abs(np.asarray(rho, dtype=float))
        return np.exp(self.log_w_hat(np.log(rho)) - math.log(self.omega))

    def profiles(self, rho: float):
        """Return ``(w, w_hat, w_tilde)`` at a positive radius."""
        if not rho > 0:
            raise ValueError("rho must be positive")
        x = math.log(rho)
        lw = float(self.log_w_hat(x))
        w_hat = math.exp(lw)
        return (
            math.exp(lw - math.log(self.omega) - (self.n - 1) * x),
            w_hat,
            w_hat / self.omega,
        )

    def breakpoints(self, x_lo: float, x_hi: float) -> np.ndarray:
        """Log-radius breakpoints strictly inside ``(x_lo, x_hi)``."""
        edges = self._hi[:-1]
        extra = [-1.0] if np.any(self.pieces.b != 0.0) else []
        pts = np.concatenate([edges, extra])
        return np.unique(pts[(pts > x_lo) & (pts < x_hi)])

    def summary(self) -> dict:
        return {"family": self.family, "n": self.n, **self.params}

    def cached(self, key, fn):
        """Memoize ``fn()`` under ``key`` on this immutable object."""
        store = self._cache
        if key not in store:
            store[key] = fn()
        return store[key]


# ---------------------------------------------------------------------------
# families


def power_log(n: int, alpha: float = 0.0, beta: float = 0.0) -> RadialWeight:
    """w(rho) = rho**alpha * phi(rho)**beta."""
    n = _check_n(n)
    alpha, beta = float(alpha), float(beta)
    if not alpha > -n:
        raise NonIntegrable(f"alpha={alpha} <= -n={-n}: w_hat not integrable at 0")
    lw = math.log(sphere_area(n))
    k = alpha + n - 1
    rows = [
        (-math.inf, 0.0, -1.0, 0.0, lw, 0.0, 0.0, k, beta),
        (-1.0, 0.0, math.inf, 0.0, lw, 0.0, 0.0, k, 0.0),
    ]
    W = RadialWeight(n, "power_log", {"alpha": alpha, "beta": beta}, PieceTable.from_rows(rows))
    _check_integrable(W)
    return W


def constant(n: int) -> RadialWeight:
    return power_log(n, 0.0, 0.0)


def staircase_level_scale(k: int) -> float:
    """L_k = 2**k * log 2, so that log alpha_k = -L_k and log beta_k = -1.5 L_k."""
    return math.ldexp(LN2, k)


def dyadic_staircase(n: int = 2, depth: int = DEFAULT_STAIRCASE_DEPTH) -> RadialWeight:
    """The doubly-exponential staircase weight.

    With alpha_k = 2**(-2**k) and beta_k = alpha_k**1.5,

        w = alpha_{k+1}        on [alpha_{k+1}, beta_k],
        w = rho**2 / alpha_k   on [beta_k, alpha_k],
        w = rho                for rho >= 1/2.

    Levels k >= ``depth`` are replaced by the constant alpha_depth.
    """
    n = _check_n(n)
    depth = int(depth)
    if not 1 <= depth <= 1000:
        raise MalformedSpec("staircase depth must lie in [1, 1000]")
    lw = math.log(sphere_area(n))
    rows = []
    Lb = staircase_level_scale(depth - 1)
    # below alpha_depth: constant alpha_depth = exp(-2 L_{depth-1})
    rows.append((-math.inf, 0.0, 0.0, -2.0, lw, -2.0, Lb, n - 1.0, 0.0))
    for j in range(depth - 1, -1, -1):
        L = staircase_level_scale(j)
        rows.append((0.0, -2.0, 0.0, -1.5, lw, -2.0, L, n - 1.0, 0.0))
        rows.append((0.0, -1.5, 0.0, -1.0, lw, 1.0, L, n + 1.0, 0.0))
    rows.append((-LN2, 0.0, math.inf, 0.0, lw, 0.0, 0.0, float(n), 0.0))
    W = RadialWeight(n, "dyadic_staircase", {"depth": depth}, PieceTable.from_rows(rows))
    return W


def staircase_log_radius(k: int, which: str = "alpha") -> float:
    """Natural-log radius of alpha_k or beta_k, bit-identical to the piece table."""
    L = staircase_level_scale(k)
    if which == "alpha":
        return -L
    if which == "beta":
        return -1.5 * L
    raise ValueError(which)


def piecewise(n: int, segments) -> RadialWeight:
    """Segments ``{"lo", "hi", "coef", "power", "log_power"}`` with
    w = coef * rho**power * phi(rho)**log_power on [lo, hi].

    ``hi`` may be ``None`` or ``inf`` for the last segment.
    """
    n = _check_n(n)
    segs = []
    for s in segments:
        s = dict(s)
        unknown = set(s) - {"lo", "hi", "coef", "power", "log_power"}
        if unknown:
            raise MalformedSpec(f"unknown segment keys {sorted(unknown)}")
        lo = float(s["lo"])
        hi = math.inf if s.get("hi") is None else float(s["hi"])
        coef = float(s.get("coef", 1.0))
        if not hi > lo:
            raise MalformedSpec(f"empty segment [{lo}, {hi}]")
        if not coef > 0:
            raise MalformedSpec("segment coefficients must be positive")
        segs.append((lo, hi, coef, float(s.get("power", 0.0)), float(s.get("log_power", 0.0))))
    if not segs:
        raise MalformedSpec("no segments")
    segs.sort()
    if segs[0][0] != 0.0:
        raise MalformedSpec("segments must start at 0")
    if segs[-1][1] != math.inf:
        raise MalformedSpec("segments must extend to infinity")
    for (_, h, *_), (l2, *_) in zip(segs, segs[1:]):
        if h != l2:
            raise MalformedSpec(f"gap or overlap at {h} / {l2}")
    lw = math.log(sphere_area(n))
    rows = []
    for lo, hi, coef, e, f in segs:
        xl = -math.inf if lo == 0 else math.log(lo)
        xh = math.log(hi) if hi < math.inf else math.inf
        c = lw + math.log(coef)
        k = e + n - 1
        cuts = [xl, xh]
        if f != 0.0 and xl < -1.0 < xh:
            cuts = [xl, -1.0, xh]
        for a, b in zip(cuts, cuts[1:]):
            rows.append((a, 0.0, b, 0.0, c, 0.0, 0.0, k, f if b <= -1.0 else 0.0))
    W = RadialWeight(n, "piecewise", {"segments": [list(s) for s in segs]}, PieceTable.from_rows(rows))
    _check_integrable(W)
    return W


def tabulated(n: int, samples) -> RadialWeight:
    """Log-linear interpolation of ``[[rho, w], ...]``; the end slopes are
    extended as power laws toward 0 and infinity."""
    n = _check_n(n)
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or len(arr) < 2:
        raise MalformedSpec("samples must be at least two [rho, w] pairs")
    rho, wv = arr[:, 0], arr[:, 1]
    if np.any(rho <= 0) or np.any(np.diff(rho) <= 0):
        raise MalformedSpec("sample radii must be positive and strictly increasing")
    if np.any(wv <= 0) or not np.all(np.isfinite(wv)):
        raise MalformedSpec("sample values must be positive and finite")
    x, y = np.log(rho), np.log(wv)
    slopes = np.diff(y) / np.diff(x)
    lw = math.log(sphere_area(n))
    edges = np.concatenate([[-math.inf], x[1:-1], [math.inf]])
    rows = []
    for j, e in enumerate(slopes):
        c = lw + y[j] - e * x[j]
        rows.append((edges[j], 0.0, edges[j + 1], 0.0, c, 0.0, 0.0, e + n - 1, 0.0))
    W = RadialWeight(n, "tabulated", {"samples": arr.tolist()}, PieceTable.from_rows(rows))
    _check_integrable(W)
    return W


def truncated_power(n: int = 2, alpha: float = -1.0) -> RadialWeight:
    """|x|**alpha inside the unit ball and 1 outside."""
    return piecewise(
        n,
        [
            {"lo": 0.0, "hi": 1.0, "coef": 1.0, "power": alpha},
            {"lo": 1.0, "hi": None, "coef": 1.0, "power": 0.0},
        ],
    )


# ---------------------------------------------------------------------------
# spec loading

_KEYS = {
    "power_log": {"alpha", "beta"},
    "constant": set(),
    "dyadic_staircase": {"depth"},
    "piecewise": {"segments"},
    "tabulated": {"samples"},
}


def build_weight(spec: dict) -> RadialWeight:
    """Construct a weight from a JSON-style mapping (see README for the schema)."""
    if not isinstance(spec, dict):
        raise MalformedSpec("weight spec must be a JSON object")
    spec = dict(spec)
    fam = spec.pop("family", None)
    if fam not in _KEYS:
        raise MalformedSpec(f"unknown family {fam!r}")
    n = spec.pop("n", 2)
    unknown = set(spec) - _KEYS[fam]
    if unknown:
        raise MalformedSpec(f"unknown keys for {fam}: {sorted(unknown)}")
    try:
        if fam == "power_log":
            return power_log(n, spec.get("alpha", 0.0), spec.get("beta", 0.0))
        if fam == "constant":
            return constant(n)
        if fam == "dyadic_staircase":
            return dyadic_staircase(n, spec.get("depth", DEFAULT_STAIRCASE_DEPTH))
        if fam == "piecewise":
            return piecewise(n, spec["segments"])
        return tabulated(n, spec["samples"])
    except KeyError as exc:
        raise MalformedSpec(f"missing key {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, (MalformedSpec, NonIntegrable)):
            raise
        raise MalformedSpec(str(exc)) from None


def load_weight(path) -> RadialWeight:
    with open(Path(path)) as fh:
        return build_weight(json.load(fh))


def _check_n(n) -> int:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise MalformedSpec(f"dimension must be a positive integer, got {n!r}")
    return int(n)


def _check_integrable(W: RadialWeight) -> None:
    from .quadrature import log_integral

    if not math.isfinite(log_integral(W, 1.0, -math.inf, 0.0)):
        raise NonIntegrable(f"{W.family}: integral of w_hat over (0, 1) diverges")
