"""Parametric recovery curves.

A recovery curve starts at a known pre-event level S, drops instantaneously
at the event, then rises strictly monotonically toward an asymptote that
never exceeds S.  The scaled trajectory ("recovery shape") is

    g(t) = (1 - a) * (1 - b * exp(-t / c))

with a = asymptotic proportional drop, b = initial proportional drop in
excess of the asymptotic drop, and c = recovery time constant in months.
The curve itself is f(t) = S * g(t) for t > 0 and f(0) = S.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

__all__ = [
    "RecoveryShapeParams",
    "RecoveryCurve",
    "ShapeFit",
    "CurveError",
    "FitError",
    "eval_shape",
    "eval_curve",
    "asymptote",
    "value_at_zero_plus",
    "fit_shape",
    "shape_values",
]

# Fitting bounds and multi-start grid.  c is capped well above any plausible
# recovery horizon to keep the optimizer off the flat ridge c -> inf.
C_MAX = 1e4
C_MIN = 1e-3
_C_GRID_LO = 0.5
_C_GRID_HI = 96.0
_C_MID = math.sqrt(_C_GRID_LO * _C_GRID_HI)  # geometric midpoint, ~6.93
_A_UNCONSTRAINED_LO = -1e3


class CurveError(ValueError):
    """Invalid curve parameters or evaluation outside the domain."""


class FitError(ValueError):
    """Curve fitting cannot proceed on the given points."""


@dataclass(frozen=True)
class RecoveryShapeParams:
    """The (a, b, c) triple defining a scaled recovery trajectory."""

    a: float
    b: float
    c: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.a) and 0.0 <= self.a <= 1.0):
            raise CurveError(f"a must be in [0, 1], got {self.a}")
        if not (np.isfinite(self.b) and 0.0 <= self.b <= 1.0):
            raise CurveError(f"b must be in [0, 1], got {self.b}")
        if not (np.isfinite(self.c) and self.c > 0.0):
            raise CurveError(f"c must be > 0, got {self.c}")


@dataclass(frozen=True)
class RecoveryCurve:
    """A recovery shape anchored to a pre-event level s."""

    s: float
    shape: RecoveryShapeParams

    def __post_init__(self) -> None:
        if not (np.isfinite(self.s) and 0.0 <= self.s <= 1.0):
            raise CurveError(f"s must be in [0, 1], got {self.s}")


def shape_values(a, b, c, t):
    """Raw g(t) without parameter validation.

    Used internally by fitting, where a may lie outside [0, 1] when the
    asymptote is unconstrained.
    """
    t = np.asarray(t, dtype=float)
    return (1.0 - a) * (1.0 - b * np.exp(-t / c))


def eval_shape(shape: RecoveryShapeParams, t):
    """Evaluate the scaled trajectory g at time(s) t > 0 (months)."""
    t_arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t_arr)) or np.any(t_arr <= 0.0):
        raise CurveError("t must be finite and > 0")
    out = shape_values(shape.a, shape.b, shape.c, t_arr)
    return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out


def eval_curve(curve: RecoveryCurve, t):
    """Evaluate the curve f at time(s) t >= 0; f(0) = s by definition."""
    t_arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t_arr)) or np.any(t_arr < 0.0):
        raise CurveError("t must be finite and >= 0")
    g = shape_values(curve.shape.a, curve.shape.b, curve.shape.c, t_arr)
    out = np.where(t_arr == 0.0, 1.0, g) * curve.s
    return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out


def asymptote(shape: RecoveryShapeParams) -> float:
    """Limit of g(t) as t -> inf: 1 - a."""
    return 1.0 - shape.a


def value_at_zero_plus(shape: RecoveryShapeParams) -> float:
    """Limit of g(t) as t -> 0+: (1 - a)(1 - b)."""
    return (1.0 - shape.a) * (1.0 - shape.b)


@dataclass(frozen=True)
class ShapeFit:
    """Least-squares fit result; a may exceed [0, 1] downward when the
    asymptote was unconstrained."""

    a: float
    b: float
    c: float
    sse: float

    def values(self, t):
        return shape_values(self.a, self.b, self.c, t)


def _fit_starts(constrain_asymptote: bool) -> list[tuple[float, float, float]]:
    a_grid = np.linspace(0.0, 1.0, 5) if constrain_asymptote else np.linspace(-1.0, 1.0, 5)
    b_grid = np.linspace(0.0, 1.0, 5)
    logc_grid = np.linspace(math.log(_C_GRID_LO), math.log(_C_GRID_HI), 5)
    return [(a, b, lc) for a in a_grid for b in b_grid for lc in logc_grid]


def fit_shape(points, constrain_asymptote: bool = True) -> ShapeFit:
    """Fit (a, b, c) to (t, value) pairs by multi-start bounded least squares.

    With constrain_asymptote=False the fitted asymptote may exceed 1
    (a < 0), which the pre-filtering of raw study data relies on.
    Deterministic given input; when b is unidentified (flat residual) the
    fit is reported with b = 0 and c at the grid midpoint.
    """
    pts = [(float(t), float(v)) for t, v in points]
    if len(pts) < 3:
        raise FitError(f"need at least 3 points, got {len(pts)}")
    t = np.array([p[0] for p in pts])
    v = np.array([p[1] for p in pts])
    if np.any(t <= 0.0) or not np.all(np.isfinite(t)) or not np.all(np.isfinite(v)):
        raise FitError("all times must be finite and > 0, values finite")
    if np.all(t == t[0]):
        raise FitError("degenerate input: all timepoints equal")

    a_lo = 0.0 if constrain_asymptote else _A_UNCONSTRAINED_LO
    lo = np.array([a_lo, 0.0, math.log(C_MIN)])
    hi = np.array([1.0, 1.0, math.log(C_MAX)])

    def residuals(params):
        a, b, logc = params
        return shape_values(a, b, math.exp(logc), t) - v

    candidates = []
    for start in _fit_starts(constrain_asymptote):
        x0 = np.clip(np.array(start), lo, hi)
        try:
            res = least_squares(residuals, x0, bounds=(lo, hi), method="trf")
        except Exception:
            continue
        sse = float(np.sum(res.fun**2))
        candidates.append((sse, res.x[1], abs(res.x[2] - math.log(_C_MID)), tuple(res.x)))
    if not candidates:
        raise FitError("all optimizer starts failed")

    best_sse = min(c[0] for c in candidates)
    # Among numerically tied optima prefer smallest b, then c nearest the
    # grid midpoint, for determinism on unidentified fits.
    tied = [c for c in candidates if c[0] <= best_sse + 1e-10]
    tied.sort(key=lambda c: (c[1], c[2]))
    a, b, logc = tied[0][3]
    c = math.exp(logc)
    if b < 1e-8:
        # b ~ 0 leaves c unidentified; pin both to the documented tie-break.
        b, c = 0.0, _C_MID
        best_sse = float(np.sum((shape_values(a, b, c, t) - v) ** 2))
    else:
        best_sse = tied[0][0]
    return ShapeFit(a=float(a), b=float(b), c=float(c), sse=best_sse)
