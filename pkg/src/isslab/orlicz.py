"""Young functions, Luxemburg norms and related Orlicz-space machinery.

A Young function is a convex gauge Phi with Phi(0) = 0, Phi(s)/s -> 0 at 0
and -> infinity at infinity.  The identity kind is the explicit L^1
convention and is exempt from the growth conditions.  The Luxemburg norm of
a piecewise-constant signal is computed exactly: the defining integral is a
finite sum of rectangle terms and the map k -> int Phi(|u|/k) is monotone
decreasing, so bracketing plus bisection is globally convergent.

Complementary functions are closed form for the s^p/p family and a
tabulated Legendre transform otherwise (log grid, linear interpolation).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, DomainError, NumericError, UnsupportedError
from .signals import Interval, Signal, restrict

__all__ = [
    "YoungFunction",
    "eval_young",
    "legendre_transform",
    "complementary",
    "luxemburg_norm",
    "dual_norm_lower_bound",
    "check_delta2",
    "Delta2Result",
    "holder_pair",
    "small_interval_norm",
]

_KINDS = ("power", "power_over_p", "loglog", "identity", "tabulated")

# knot count for tabulated Legendre transforms
_LEGENDRE_KNOTS = 512
# values above this are treated as out of tabulation range
_VALUE_CAP = 1e250


@dataclass(frozen=True)
class YoungFunction:
    """A convex gauge with an evaluator and (for tabulated kinds) knots.

    kind is one of 'power' (s^p), 'power_over_p' (s^p/p), 'loglog'
    (s*ln(ln(s+e))), 'identity' (s, the L^1 convention) or 'tabulated'
    (piecewise-linear through sorted (s, Phi(s)) knots, pinned at (0,0)).
    """

    kind: str
    p: float | None = None
    knots: np.ndarray | None = field(default=None)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DomainError(f"unknown Young function kind {self.kind!r}")
        if self.kind in ("power", "power_over_p"):
            if self.p is None or not self.p > 1:
                raise DomainError(f"{self.kind} needs exponent p > 1, got {self.p}")
        if self.kind == "tabulated":
            knots = np.asarray(self.knots, dtype=float)
            if knots.ndim != 2 or knots.shape[1] != 2 or knots.shape[0] < 2:
                raise DataError("tabulated kind needs an (n, 2) knot array, n >= 2")
            if np.any(np.diff(knots[:, 0]) <= 0):
                raise DataError("tabulated knots must have strictly increasing s")
            if np.any(knots < 0) or not np.all(np.isfinite(knots)):
                raise DataError("tabulated knots must be finite and nonnegative")
            object.__setattr__(self, "knots", knots)

    # -- constructors --------------------------------------------------

    @staticmethod
    def power(p: float) -> "YoungFunction":
        return YoungFunction("power", p=p)

    @staticmethod
    def power_over_p(p: float) -> "YoungFunction":
        return YoungFunction("power_over_p", p=p)

    @staticmethod
    def loglog() -> "YoungFunction":
        return YoungFunction("loglog")

    @staticmethod
    def identity() -> "YoungFunction":
        return YoungFunction("identity")

    @staticmethod
    def tabulated(knots) -> "YoungFunction":
        return YoungFunction("tabulated", knots=knots)

    # -- evaluation ----------------------------------------------------

    def __call__(self, s):
        s_arr = np.asarray(s, dtype=float)
        if np.any(s_arr < 0):
            raise DomainError("Young functions are defined for s >= 0 only")
        with np.errstate(over="ignore"):
            if self.kind == "power":
                out = s_arr**self.p
            elif self.kind == "power_over_p":
                out = s_arr**self.p / self.p
            elif self.kind == "identity":
                out = s_arr.copy()
            elif self.kind == "loglog":
                out = s_arr * np.log(np.log(s_arr + math.e))
            else:
                ks, kv = self.knots[:, 0], self.knots[:, 1]
                # pin at the origin; extrapolate above with the last slope
                out = np.interp(s_arr, np.append(0.0, ks), np.append(0.0, kv))
                top = s_arr > ks[-1]
                if np.any(top):
                    slope = (kv[-1] - kv[-2]) / (ks[-1] - ks[-2])
                    out = np.where(top, kv[-1] + slope * (s_arr - ks[-1]), out)
        return out if out.ndim else float(out)

    # -- serialization -------------------------------------------------

    def to_json(self) -> dict:
        if self.kind == "tabulated":
            return {"kind": self.kind, "knots": self.knots.tolist()}
        if self.p is not None:
            return {"kind": self.kind, "p": self.p}
        return {"kind": self.kind}

    @staticmethod
    def from_json(obj) -> "YoungFunction":
        if isinstance(obj, str):
            obj = json.loads(obj)
        if obj["kind"] == "tabulated":
            return YoungFunction.tabulated(np.asarray(obj["knots"]))
        return YoungFunction(obj["kind"], p=obj.get("p"))


def eval_young(phi: YoungFunction, s) -> float:
    """Evaluate Phi(s); negative s is a domain error."""
    return phi(s)


# ---------------------------------------------------------------------------
# complementary functions
# ---------------------------------------------------------------------------


def legendre_transform(phi: YoungFunction, s: float) -> float:
    """Phi~(s) = sup_{t>=0} (s*t - Phi(t)), by coarse grid + golden section.

    The objective is concave in t for convex Phi, so the grid argmax
    brackets the maximizer and golden-section refinement converges.
    """
    if s < 0:
        raise DomainError("Legendre transform argument must be >= 0")
    if s == 0.0:
        return 0.0
    t = np.logspace(-12, 290, 3000)
    with np.errstate(over="ignore", invalid="ignore"):
        g = s * t - phi(t)
    g = np.where(np.isfinite(g), g, -np.inf)
    i = int(np.argmax(g))
    best = max(g[i], 0.0)
    lo = t[max(i - 1, 0)]
    hi = t[min(i + 1, t.size - 1)]
    invphi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc = s * c - phi(c)
    fd = s * d - phi(d)
    for _ in range(200):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = s * c - phi(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = s * d - phi(d)
        if b - a <= 1e-14 * (1.0 + b):
            break
    return float(max(best, fc, fd, 0.0))


def complementary(phi: YoungFunction) -> YoungFunction:
    """Complementary Young function: closed form for s^p/p, tabulated
    Legendre transform otherwise.  Undefined for the identity kind."""
    if phi.kind == "identity":
        raise UnsupportedError("no complementary Young function for Phi(t)=t")
    if phi.kind == "power_over_p":
        q = phi.p / (phi.p - 1.0)
        return YoungFunction.power_over_p(q)

    # find where the transform leaves representable range, then tabulate
    s_max = 1.0
    while s_max < 1e6:
        if legendre_transform(phi, 2.0 * s_max) >= _VALUE_CAP:
            break
        s_max *= 2.0
    s_knots = np.logspace(-6, math.log10(s_max), _LEGENDRE_KNOTS)
    vals = np.array([legendre_transform(phi, s) for s in s_knots])
    keep = vals < _VALUE_CAP
    return YoungFunction.tabulated(np.column_stack([s_knots[keep], vals[keep]]))


# ---------------------------------------------------------------------------
# Luxemburg norm
# ---------------------------------------------------------------------------


def _modular(phi: YoungFunction, r: np.ndarray, w: np.ndarray, k: float) -> float:
    with np.errstate(over="ignore"):
        vals = phi(r / k)
    return float(np.sum(w * np.where(np.isfinite(vals), vals, np.inf)))


def luxemburg_norm(phi: YoungFunction, u: Signal, iv: Interval | None = None,
                   tol: float = 1e-12) -> float:
    """inf{k > 0 : int_iv Phi(|u(s)|/k) ds <= 1}, exact quadrature.

    The identity kind returns the L^1 norm exactly; the a.e.-zero signal
    has norm 0.
    """
    if tol <= 0:
        raise DomainError("tol must be > 0")
    if iv is not None:
        u = restrict(u, iv)
    if not np.all(np.isfinite(u.values)):
        raise DataError("signal contains non-finite samples")
    r = u.cell_norms()
    w = u.widths
    if not np.any(r > 0):
        return 0.0
    if phi.kind == "identity":
        return float(np.sum(w * r))

    k = float(np.max(r))
    if k == 0.0:
        return 0.0
    # bracket the unique crossing of the modular through 1
    if _modular(phi, r, w, k) <= 1.0:
        hi = k
        lo = k / 2.0
        for _ in range(2400):
            if _modular(phi, r, w, lo) > 1.0:
                break
            hi = lo
            lo /= 2.0
            if lo < 1e-300:
                return 0.0
        else:
            raise NumericError("luxemburg_norm: lower bracket not found")
    else:
        lo = k
        hi = k * 2.0
        for _ in range(1200):
            if _modular(phi, r, w, hi) <= 1.0:
                break
            lo = hi
            hi *= 2.0
            if hi > 1e290:
                raise NumericError("luxemburg_norm: upper bracket not found")
        else:
            raise NumericError("luxemburg_norm: upper bracket not found")

    while hi - lo > tol * (1.0 + hi):
        mid = 0.5 * (lo + hi)
        if _modular(phi, r, w, mid) <= 1.0:
            hi = mid
        else:
            lo = mid
    # hi is on the feasible side of the crossing, so the result never
    # under-reports the norm
    return hi


def small_interval_norm(phi: YoungFunction, u: Signal, t: float, delta: float) -> float:
    """Luxemburg norm of u on [t, t+delta]; the solver's step-size probe."""
    if delta <= 0:
        raise DomainError("delta must be > 0")
    return luxemburg_norm(phi, u, Interval(t, t + delta))


# ---------------------------------------------------------------------------
# dual lower bound and Hoelder pairing
# ---------------------------------------------------------------------------


def dual_norm_lower_bound(phi: YoungFunction, u: Signal, iv: Interval,
                          budget: int = 8) -> float:
    """Certified lower bound for the dual-formulation norm
    sup{int |u| |v| : int Phi~(|v|) <= 1}.

    Candidates v are piecewise-constant on u's grid: the shape of |u|, the
    constant shape, and seeded random shapes; each is scaled so the
    complementary modular equals 1, which makes every candidate feasible.
    """
    if budget < 1:
        raise DomainError("budget must be >= 1")
    comp = complementary(phi)
    u = restrict(u, iv)
    r = u.cell_norms()
    w = u.widths
    if not np.any(r > 0):
        return 0.0

    shapes = [r, np.ones_like(r)]
    rng = np.random.Generator(np.random.Philox(20514))
    while len(shapes) < budget:
        shapes.append(rng.uniform(0.0, 1.0, size=r.size))
    shapes = shapes[:budget]

    best = 0.0
    for v in shapes:
        if not np.any(v > 0):
            continue
        # scale so int Phi~(c*v) = 1; the modular is increasing in c
        c_hi = 1.0 / float(np.max(v))
        for _ in range(1200):
            if _modular(comp, v, w, 1.0 / c_hi) >= 1.0:
                break
            c_hi *= 2.0
            if c_hi > 1e290:
                c_hi = np.nan
                break
        if not np.isfinite(c_hi):
            continue
        c_lo = 0.0
        for _ in range(200):
            mid = 0.5 * (c_lo + c_hi)
            if _modular(comp, v, w, 1.0 / mid) <= 1.0:
                c_lo = mid
            else:
                c_hi = mid
            if c_hi - c_lo <= 1e-13 * (1.0 + c_hi):
                break
        best = max(best, float(np.sum(w * r * (c_lo * v))))
    return best


def holder_pair(u: Signal, v: Signal, phi: YoungFunction, iv: Interval) -> dict:
    """Both sides of the generalized Hoelder inequality
    int |u||v| <= 2 ||u||_{L_Phi} ||v||_{L_Phi~} on iv."""
    comp = complementary(phi)
    ur = restrict(u, iv)
    vr = restrict(v, iv)
    cuts = np.union1d(ur.grid, vr.grid)
    mids = 0.5 * (cuts[:-1] + cuts[1:])
    wu = np.array([np.linalg.norm(ur.value_at(t)) for t in mids])
    wv = np.array([np.linalg.norm(vr.value_at(t)) for t in mids])
    lhs = float(np.sum(np.diff(cuts) * wu * wv))
    rhs = 2.0 * luxemburg_norm(phi, u, iv) * luxemburg_norm(comp, v, iv)
    return {"lhs": lhs, "rhs": rhs}


# ---------------------------------------------------------------------------
# Delta_2 condition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Delta2Result:
    satisfied: bool
    K: float


def check_delta2(phi: YoungFunction, s0: float = 1.0,
                 grid: np.ndarray | None = None) -> Delta2Result:
    """Empirical Delta_2 check: K = max Phi(2s)/Phi(s) over a geometric
    grid, satisfied when the ratio sequence stays bounded.

    The existential 'there exist K and s0' is approximated by bounded-ratio
    detection: a ratio spread beyond 100x over the grid is reported as
    divergent.  Tabulated kinds are checked on their exact knot support.
    """
    if s0 < 0:
        raise DomainError("s0 must be >= 0")
    if grid is None:
        top = 1e6
        if phi.kind == "tabulated":
            top = min(top, phi.knots[-1, 0] / 2.0)
        lo = max(s0, 1e-8)
        if top <= lo:
            raise DomainError("tabulated support too small for a Delta_2 grid")
        grid = np.geomspace(lo, top, 200)
    else:
        grid = np.asarray(grid, dtype=float)
        if grid.size == 0 or np.any(grid < s0):
            raise DomainError("grid must be a nonempty subset of [s0, inf)")

    num = np.asarray(phi(2.0 * grid))
    den = np.asarray(phi(grid))
    if np.any((den == 0) & (num > 0)):
        return Delta2Result(False, math.inf)
    mask = den > 0
    if not np.any(mask):
        return Delta2Result(True, 0.0)
    ratios = num[mask] / den[mask]
    K = float(np.max(ratios))
    if not math.isfinite(K):
        return Delta2Result(False, math.inf)
    spread = K / float(np.min(ratios))
    return Delta2Result(spread <= 100.0, K)
