"""Least-squares power-law fits for scaling sweeps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class FitResult:
    slope: float
    intercept: float
    r_squared: float
    xs: np.ndarray
    ys: np.ndarray

    def passes(self, predicted: float, tol: float = 0.3, r2_min: float = 0.98) -> bool:
        return abs(self.slope - predicted) <= tol and self.r_squared >= r2_min


def fit_loglog(xs, ys) -> FitResult:
    """Ordinary least squares on (log x, log y); returns slope, intercept, R^2."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1 or xs.size < 2:
        raise ValueError("fit needs matching 1-d arrays with at least two points")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("log-log fit needs strictly positive data")
    lx, ly = np.log(xs), np.log(ys)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return FitResult(float(slope), float(intercept), r2, xs, ys)
