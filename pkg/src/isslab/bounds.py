"""Comparison-function machinery for ISS estimates of bilinear systems.

Implements the explicit gain functions

    beta(s, t)  = M e^{-omega t} s + (1/2) M^2 e^{-omega t} s^2 sup_{r in [0,t]} e^{-omega r}
    gamma1(s)   = 4 m^2 s^2 e^{4 m s}
    gamma2(s)   = s + (1/2) s^2
    gamma_fp(r) = C r e^{C sqrt(r)} + C sqrt(r) + C r

and assembles right-hand sides of the form

    ||x(t)|| <= beta(||x0||, t) + gamma1(C_B1 ||u1||_{E_Phi(0,t)})
                                + gamma2(C_B2 ||u2||_{E_Psi(0,t)})

together with an auditor that compares a computed trajectory against such a
bound point by point.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DomainError, NumericError
from .orlicz import YoungFunction, luxemburg_norm
from .signals import Interval, Signal, exp_weight

__all__ = [
    "BoundParams",
    "AuditReport",
    "beta",
    "gamma1",
    "gamma2",
    "gamma_fp",
    "iss_rhs",
    "iss_rhs_timevarying",
    "linf_bound_constant",
    "audit",
]

_EXP_OVERFLOW = 700.0


@dataclass(frozen=True)
class BoundParams:
    """Constants of the ISS estimate.

    M, omega    -- semigroup type: ||T(t)|| <= M e^{-omega t}, M >= 1
    m           -- bilinearity bound: ||F(x, u)|| <= m ||x|| ||u||
    C_B1, C_B2  -- admissibility constants of the control operators with
                   respect to the shifted semigroup e^{(omega/2) t} T(t)
    """

    M: float
    omega: float
    m: float
    C_B1: float = 0.0
    C_B2: float = 0.0

    def __post_init__(self):
        if self.M < 1.0:
            raise DomainError(f"semigroup bound M must be >= 1, got {self.M}")
        if self.m <= 0.0:
            raise DomainError(f"bilinearity bound m must be > 0, got {self.m}")
        if self.C_B1 < 0.0 or self.C_B2 < 0.0:
            raise DomainError("admissibility constants must be >= 0")


@dataclass(frozen=True)
class AuditReport:
    """Record of a bound-vs-trajectory comparison.

    max_violation   -- max over the grid of ||x(t)|| - rhs(t)
    min_slack_ratio -- min over the grid of rhs(t)/||x(t)|| (tightness)
    worst_time      -- grid time attaining max_violation
    n_points        -- number of compared grid points
    passed          -- max_violation <= tol*(1 + rhs) at every point
    """

    max_violation: float
    min_slack_ratio: float
    worst_time: float
    n_points: int
    passed: bool

    def to_json(self) -> dict:
        return {
            "max_violation": self.max_violation,
            "min_slack_ratio": self.min_slack_ratio,
            "worst_time": self.worst_time,
            "n_points": self.n_points,
            "pass": self.passed,
        }

    @staticmethod
    def from_json(obj) -> "AuditReport":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return AuditReport(
            max_violation=obj["max_violation"],
            min_slack_ratio=obj["min_slack_ratio"],
            worst_time=obj["worst_time"],
            n_points=obj["n_points"],
            passed=obj["pass"],
        )


# ---------------------------------------------------------------------------
# gain functions
# ---------------------------------------------------------------------------


def beta(p: BoundParams, s: float, t: float) -> float:
    """KL-class decay term of the estimate."""
    if s < 0 or t < 0:
        raise DomainError("beta needs s, t >= 0")
    if abs(p.omega * t) > _EXP_OVERFLOW:
        if p.omega > 0:
            return 0.0 if s == 0 else p.M * math.exp(-p.omega * t) * s
        raise NumericError("beta: |omega*t| exceeds overflow guard")
    decay = math.exp(-p.omega * t)
    sup_term = 1.0 if p.omega >= 0 else decay
    return p.M * decay * s + 0.5 * p.M**2 * decay * s * s * sup_term


def gamma1(p: BoundParams, s: float) -> float:
    """K-infinity gain of the bilinear input u1."""
    if s < 0:
        raise DomainError("gamma1 needs s >= 0")
    if 4.0 * p.m * s > _EXP_OVERFLOW:
        raise NumericError("gamma1: exponent 4*m*s exceeds overflow guard")
    return 4.0 * p.m**2 * s * s * math.exp(4.0 * p.m * s)


def gamma2(s: float) -> float:
    """K-infinity gain of the additive input u2."""
    if s < 0:
        raise DomainError("gamma2 needs s >= 0")
    return s + 0.5 * s * s


def gamma_fp(C: float, r: float) -> float:
    """K-infinity gain of the Fokker-Planck ISS estimate."""
    if C <= 0:
        raise DomainError("gamma_fp needs C > 0")
    if r < 0:
        raise DomainError("gamma_fp needs r >= 0")
    root = math.sqrt(r)
    if C * root > _EXP_OVERFLOW:
        raise NumericError("gamma_fp: exponent C*sqrt(r) exceeds overflow guard")
    return C * r * math.exp(C * root) + C * root + C * r


# ---------------------------------------------------------------------------
# right-hand sides
# ---------------------------------------------------------------------------


def _input_norm(phi: YoungFunction, u: Signal | None, t: float) -> float:
    if u is None or t == 0.0:
        return 0.0
    return luxemburg_norm(phi, u, Interval(0.0, t))


def iss_rhs(p: BoundParams, x0_norm: float, u1: Signal | None, u2: Signal | None,
            phi: YoungFunction, psi: YoungFunction, t: float) -> float:
    """Right-hand side of the exponentially stable (omega > 0) estimate with
    t-uniform admissibility constants."""
    if p.omega <= 0.0:
        raise ContractError(
            "iss_rhs needs omega > 0; use iss_rhs_timevarying for the "
            "general-type estimate"
        )
    if x0_norm < 0 or t < 0:
        raise DomainError("iss_rhs needs x0_norm, t >= 0")
    return (
        beta(p, x0_norm, t)
        + gamma1(p, p.C_B1 * _input_norm(phi, u1, t))
        + gamma2(p.C_B2 * _input_norm(psi, u2, t))
    )


def iss_rhs_timevarying(p: BoundParams, x0_norm: float, u1: Signal | None,
                        u2: Signal | None, phi: YoungFunction,
                        psi: YoungFunction, t: float) -> float:
    """General-type estimate: the additive input enters through the
    exponentially weighted norm e^{-(omega/2)t} ||e^{(omega/2) s} u2||.
    The C fields are interpreted as the per-horizon constants C_{t,B}."""
    if x0_norm < 0 or t < 0:
        raise DomainError("iss_rhs_timevarying needs x0_norm, t >= 0")
    if u2 is None or t == 0.0:
        u2_term = 0.0
    else:
        if abs(0.5 * p.omega * t) > _EXP_OVERFLOW:
            raise NumericError("iss_rhs_timevarying: |omega*t/2| exceeds overflow guard")
        weighted = exp_weight(u2, 0.5 * p.omega)
        u2_term = math.exp(-0.5 * p.omega * t) * luxemburg_norm(
            psi, weighted, Interval(0.0, t)
        )
    return (
        beta(p, x0_norm, t)
        + gamma1(p, p.C_B1 * _input_norm(phi, u1, t))
        + gamma2(p.C_B2 * u2_term)
    )


# ---------------------------------------------------------------------------
# L-infinity comparison constant
# ---------------------------------------------------------------------------


def linf_bound_constant(psi: YoungFunction, omega: float) -> float:
    """Constant C = max{1/eps, 2/omega} with Psi(x) <= x on (0, eps].

    It guarantees e^{-(omega/2)t} ||e^{(omega/2) s} u2||_{E_Psi(0,t)}
    <= C ||u2||_{L_infinity} uniformly in t.  eps is found by grid search
    on a log grid down to 1e-12.
    """
    if omega <= 0:
        raise DomainError("linf_bound_constant needs omega > 0")
    for eps in np.geomspace(1.0, 1e-12, 400):
        xs = np.geomspace(eps * 1e-8, eps, 60)
        if np.all(psi(xs) <= xs * (1.0 + 1e-12)):
            return max(1.0 / eps, 2.0 / omega)
    raise NumericError(
        "linf_bound_constant: no eps <= 1 with Psi(x) <= x found above 1e-12"
    )


# ---------------------------------------------------------------------------
# auditing
# ---------------------------------------------------------------------------


def audit(traj, rhs, tol: float = 1e-6) -> AuditReport:
    """Compare a trajectory's norms against a bound on the same grid.

    rhs is either a callable t -> bound value or an array aligned with the
    trajectory grid.  PASS means ||x(t)|| - rhs(t) <= tol*(1 + rhs(t)) at
    every grid point.
    """
    if tol < 0:
        raise DomainError("tol must be >= 0")
    grid = np.asarray(traj.grid, dtype=float)
    norms = np.asarray(traj.norms, dtype=float)
    if grid.size != norms.size or grid.size < 1:
        raise ContractError("trajectory grid and norms must align and be nonempty")
    if callable(rhs):
        rhs_vals = np.array([float(rhs(t)) for t in grid])
    else:
        rhs_vals = np.asarray(rhs, dtype=float)
        if rhs_vals.size != grid.size:
            raise ContractError(
                f"bound values ({rhs_vals.size}) do not share the trajectory "
                f"grid ({grid.size} points)"
            )
    violations = norms - rhs_vals
    i = int(np.argmax(violations))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(norms > 0, rhs_vals / norms, np.inf)
    passed = bool(np.all(violations <= tol * (1.0 + rhs_vals)))
    return AuditReport(
        max_violation=float(violations[i]),
        min_slack_ratio=float(np.min(ratios)),
        worst_time=float(grid[i]),
        n_points=int(grid.size),
        passed=passed,
    )
