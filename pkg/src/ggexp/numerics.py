"""Scalar special functions, root finding, and bounded 1-D maximization.

Everything here is pure and reentrant.  Results are extended-real: a genuinely
unbounded objective is reported as ``math.inf`` by callers, never as a large
sentinel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Bracket",
    "OptResult",
    "NumericsError",
    "NoSignChangeError",
    "NonFiniteFunctionError",
    "gamma_fn",
    "find_root",
    "maximize_1d",
]

# Defaults: residuals are absolute, argument tolerances dimensionless.  All
# quantities handled by this package are O(1)-O(10) at desk scale.
ROOT_TOL = 1e-12
ARG_TOL = 1e-9

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class NumericsError(ValueError):
    """Base class for numerics failures."""


class NoSignChangeError(NumericsError):
    """The supplied bracket does not straddle a sign change."""


class NonFiniteFunctionError(NumericsError):
    """The objective returned NaN, or was non-finite everywhere."""


@dataclass(frozen=True)
class Bracket:
    """Closed search interval with an absolute tolerance."""

    lo: float
    hi: float
    tol: float = ROOT_TOL

    def __post_init__(self) -> None:
        if not (self.lo < self.hi):
            raise NumericsError(f"bracket requires lo < hi, got [{self.lo}, {self.hi}]")
        if not (self.tol > 0.0):
            raise NumericsError(f"bracket tolerance must be positive, got {self.tol}")


@dataclass(frozen=True)
class OptResult:
    """Root or extremum location together with diagnostics."""

    x: float
    value: float
    residual: float
    iterations: int


def gamma_fn(t: float) -> float:
    """Gamma function on the positive half line.

    Raises ValueError for t <= 0 (the reflection branch is never needed here).
    """
    if not (t > 0.0):
        raise NumericsError(f"gamma_fn requires t > 0, got {t}")
    return math.gamma(t)


def find_root(f: Callable[[float], float], bracket: Bracket) -> OptResult:
    """Locate a zero of ``f`` inside ``bracket`` with a bisection/secant hybrid.

    The bracket endpoints must give opposite signs.  Iteration stops once the
    absolute residual drops below ``bracket.tol`` (or the interval collapses
    to floating-point resolution); the returned point always lies inside the
    original bracket.  Deterministic for fixed inputs.
    """
    a, b, tol = bracket.lo, bracket.hi, bracket.tol
    fa, fb = f(a), f(b)
    for name, v in (("f(lo)", fa), ("f(hi)", fb)):
        if not math.isfinite(v):
            raise NonFiniteFunctionError(f"{name} is not finite: {v}")
    if fa == 0.0:
        return OptResult(a, 0.0, 0.0, 1)
    if fb == 0.0:
        return OptResult(b, 0.0, 0.0, 1)
    if math.copysign(1.0, fa) == math.copysign(1.0, fb):
        raise NoSignChangeError(f"f({a})={fa} and f({b})={fb} have the same sign")

    x, fx = (a, fa) if abs(fa) <= abs(fb) else (b, fb)
    iterations = 0
    while abs(fx) > tol and (b - a) > 4.0 * math.ulp(max(abs(a), abs(b), 1.0)):
        iterations += 1
        # Secant proposal from the current bracket, clamped to its interior;
        # fall back to the midpoint whenever the proposal is degenerate.
        denom = fb - fa
        if denom != 0.0:
            xs = a - fa * (b - a) / denom
        else:
            xs = 0.5 * (a + b)
        if not (a < xs < b):
            xs = 0.5 * (a + b)
        # Alternate with bisection to guarantee interval shrinkage.
        if iterations % 2 == 0:
            xs = 0.5 * (a + b)
        fxs = f(xs)
        if math.isnan(fxs):
            raise NonFiniteFunctionError(f"f({xs}) is NaN")
        if abs(fxs) < abs(fx):
            x, fx = xs, fxs
        if fxs == 0.0:
            x, fx = xs, 0.0
            break
        if math.copysign(1.0, fxs) == math.copysign(1.0, fa):
            a, fa = xs, fxs
        else:
            b, fb = xs, fxs
        if iterations > 400:
            break
    return OptResult(x, fx, abs(fx), max(iterations, 1))


def _golden_section_max(
    f: Callable[[float], float], a: float, b: float, tol: float
) -> tuple[float, float, int]:
    """Golden-section maximization on [a, b]; non-finite values rank lowest."""

    def val(x: float) -> float:
        y = f(x)
        return y if math.isfinite(y) else -math.inf

    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = val(c), val(d)
    iterations = 0
    while (b - a) > tol and iterations < 200:
        iterations += 1
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = val(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = val(d)
    x = c if fc >= fd else d
    return x, max(fc, fd), iterations


def maximize_1d(
    f: Callable[[float], float],
    bracket: Bracket,
    grid_points: int = 257,
    grid: Sequence[float] | np.ndarray | None = None,
) -> OptResult:
    """Maximize a scalar function on a bracket.

    A coarse grid scan locates the best cell, then golden-section refinement
    polishes the argmax inside the two neighbouring cells.  ``grid`` replaces
    the default uniform grid when the objective calls for non-uniform spacing
    (the caller guarantees it is sorted and inside the bracket).  Values of
    +/-inf and NaN are treated as sentinels and never win; if every grid value
    is non-finite the search fails.

    The returned value is never below the best grid sample.
    """
    if grid is None:
        if grid_points < 3:
            raise NumericsError(f"grid_points must be >= 3, got {grid_points}")
        xs = np.linspace(bracket.lo, bracket.hi, grid_points)
    else:
        xs = np.asarray(grid, dtype=float)
        if xs.size < 3:
            raise NumericsError("explicit grid needs at least 3 points")

    try:
        ys = np.asarray(f(xs), dtype=float)
        if ys.shape != xs.shape:
            raise TypeError
    except (TypeError, ValueError):
        ys = np.array([f(float(x)) for x in xs], dtype=float)
    ys = np.where(np.isnan(ys), -np.inf, ys)

    if not np.any(np.isfinite(ys)):
        raise NonFiniteFunctionError("objective is non-finite on the entire grid")

    i = int(np.argmax(ys))
    best_x, best_y = float(xs[i]), float(ys[i])
    lo = float(xs[max(i - 1, 0)])
    hi = float(xs[min(i + 1, xs.size - 1)])
    iterations = 1
    if hi > lo:
        gx, gy, iterations = _golden_section_max(f, lo, hi, ARG_TOL * max(1.0, abs(hi)))
        if gy > best_y:
            best_x, best_y = gx, gy
    return OptResult(best_x, best_y, 0.0, max(iterations, 1))
