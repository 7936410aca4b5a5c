"""Piecewise-constant vector-valued time signals.

A :class:`Signal` is the computable stand-in for a locally integrable input
function: a strictly increasing grid of breakpoints and one constant vector
value per cell.  All norms downstream (L^p, Luxemburg) are therefore exact
sums of rectangle terms.

The seeded generator uses numpy's Philox bit generator, a 64-bit
counter-based RNG, so experiment inputs are bit-reproducible across runs
and platforms for a fixed seed.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, DomainError, NumericError

__all__ = ["Interval", "Signal", "restrict", "exp_weight", "random_signal", "lp_norm"]

# e**x overflows double precision just above this exponent
_EXP_OVERFLOW = 700.0


@dataclass(frozen=True)
class Interval:
    """A time interval [t0, t1] with t1 > t0."""

    t0: float
    t1: float

    def __post_init__(self):
        if not (math.isfinite(self.t0) and math.isfinite(self.t1)):
            raise DomainError("interval endpoints must be finite")
        if self.t0 < 0:
            raise DomainError(f"t0 must be >= 0, got {self.t0}")
        if self.t1 <= self.t0:
            raise DomainError(f"need t1 > t0, got [{self.t0}, {self.t1}]")

    @property
    def length(self) -> float:
        return self.t1 - self.t0


@dataclass(frozen=True)
class Signal:
    """Piecewise-constant function of time with values in R^d.

    grid    -- strictly increasing breakpoints, length n+1
    values  -- cell values, shape (n, d)
    """

    grid: np.ndarray
    values: np.ndarray
    d: int = field(init=False)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if grid.ndim != 1 or grid.size < 2:
            raise DataError("grid must be a 1-d array with at least 2 breakpoints")
        if np.any(np.diff(grid) <= 0):
            raise DataError("grid breakpoints must be strictly increasing")
        if values.shape[0] != grid.size - 1:
            raise DataError(
                f"need one value row per cell: {values.shape[0]} rows "
                f"for {grid.size - 1} cells"
            )
        if not np.all(np.isfinite(grid)) or not np.all(np.isfinite(values)):
            raise DataError("signal contains non-finite samples")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "d", values.shape[1])

    # -- basic queries -------------------------------------------------

    @property
    def domain(self) -> Interval:
        return Interval(self.grid[0], self.grid[-1])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.grid)

    def cell_norms(self) -> np.ndarray:
        """Euclidean norm of each cell's value vector."""
        return np.linalg.norm(self.values, axis=1)

    def value_at(self, t: float) -> np.ndarray:
        """Value of the cell containing t (right-continuous; the last cell
        owns the final breakpoint)."""
        if t < self.grid[0] or t > self.grid[-1]:
            raise DomainError(f"t={t} outside signal domain")
        i = min(int(np.searchsorted(self.grid, t, side="right")) - 1, len(self.values) - 1)
        return self.values[i]

    # -- constructors --------------------------------------------------

    @staticmethod
    def constant(value, iv: Interval, d: int | None = None) -> "Signal":
        v = np.atleast_1d(np.asarray(value, dtype=float))
        if d is not None and v.size == 1:
            v = np.full(d, v[0])
        return Signal(np.array([iv.t0, iv.t1]), v.reshape(1, -1))

    @staticmethod
    def zero(iv: Interval, d: int = 1) -> "Signal":
        return Signal.constant(np.zeros(d), iv)

    # -- serialization -------------------------------------------------

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t_start", "t_end"] + [f"v_{j + 1}" for j in range(self.d)])
            for i in range(len(self.values)):
                row = [self.grid[i], self.grid[i + 1], *self.values[i]]
                writer.writerow([f"{x:.17g}" for x in row])

    @staticmethod
    def from_csv(path) -> "Signal":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        data = np.array([[float(x) for x in row] for row in rows[1:]])
        grid = np.append(data[:, 0], data[-1, 1])
        return Signal(grid, data[:, 2:])

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "t0": self.grid[0],
            "t1": self.grid[-1],
            "grid": self.grid.tolist(),
            "values": self.values.tolist(),
        }

    @staticmethod
    def from_json(obj) -> "Signal":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return Signal(np.asarray(obj["grid"]), np.asarray(obj["values"]))


def restrict(u: Signal, iv: Interval) -> Signal:
    """Clip a signal to a subinterval of its domain."""
    dom = u.domain
    if iv.t0 < dom.t0 - 1e-12 or iv.t1 > dom.t1 + 1e-12:
        raise DomainError(f"interval [{iv.t0}, {iv.t1}] outside signal domain")
    t0 = max(iv.t0, dom.t0)
    t1 = min(iv.t1, dom.t1)
    lo = int(np.searchsorted(u.grid, t0, side="right")) - 1
    hi = int(np.searchsorted(u.grid, t1, side="left"))
    lo = max(lo, 0)
    grid = u.grid[lo:hi + 1].copy()
    grid[0] = t0
    grid[-1] = t1
    return Signal(grid, u.values[lo:hi])


def exp_weight(u: Signal, rate: float) -> Signal:
    """Scale each cell value by exp(rate * cell midpoint).

    This is the midpoint-rule surrogate of multiplying by the continuous
    weight e^{rate*t}; the induced error is second order in the cell width.
    """
    if rate == 0.0:
        return u
    mids = 0.5 * (u.grid[:-1] + u.grid[1:])
    if np.max(np.abs(rate * u.grid)) > _EXP_OVERFLOW:
        raise NumericError("exp_weight: |rate * t| exceeds overflow guard")
    return Signal(u.grid, u.values * np.exp(rate * mids)[:, None])


def random_signal(seed: int, d: int, iv: Interval, cells: int, amplitude: float) -> Signal:
    """Seeded piecewise-constant signal, uniform in [-amplitude, amplitude]^d."""
    if cells < 1:
        raise DomainError("cells must be >= 1")
    if amplitude < 0:
        raise DomainError("amplitude must be >= 0")
    rng = np.random.Generator(np.random.Philox(seed))
    grid = np.linspace(iv.t0, iv.t1, cells + 1)
    values = rng.uniform(-amplitude, amplitude, size=(cells, d))
    return Signal(grid, values)


def lp_norm(u: Signal, p: float, iv: Interval | None = None) -> float:
    """Exact L^p norm (p in [1, inf]) of a piecewise-constant signal."""
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    if iv is not None:
        u = restrict(u, iv)
    r = u.cell_norms()
    if math.isinf(p):
        return float(np.max(r))
    w = u.widths
    return float(np.sum(w * r**p) ** (1.0 / p))
