"""Log-log rate fitting over shrinking radii, with an identically-zero branch."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

ZERO_BRANCH_THRESHOLD = 1e-12


@dataclass
class RateFit:
    """Power-law fit value ~= constant * r^slope over decreasing radii.

    When every sampled value sits below the zero threshold the quantity is
    treated as identically zero: slope and constant are None and zero_branch
    is set. Callers interpret a zero branch as the strongest possible decay.
    """

    radii: tuple
    values: tuple
    slope: float | None
    constant: float | None
    log_residual: float | None
    zero_branch: bool
    threshold: float

    def meets_lower_slope(self, bound: float) -> bool:
        return self.zero_branch or (self.slope is not None and self.slope >= bound)

    def meets_upper_slope(self, bound: float) -> bool:
        return (not self.zero_branch) and self.slope is not None and self.slope <= bound


def fit_rate(radii: Sequence[float], values: Sequence[float],
             zero_threshold: float = ZERO_BRANCH_THRESHOLD) -> RateFit:
    r = np.asarray(radii, dtype=float)
    v = np.asarray(values, dtype=float)
    if r.ndim != 1 or r.size < 2 or v.shape != r.shape:
        raise ValueError("need matching radii and values, at least two points")
    if np.any(r <= 0) or np.any(np.diff(r) >= 0):
        raise ValueError("radii must be positive and strictly decreasing")
    if np.any(v < 0):
        raise ValueError("rate values must be nonnegative")
    if np.all(v <= zero_threshold):
        return RateFit(radii=tuple(r), values=tuple(v), slope=None, constant=None,
                       log_residual=None, zero_branch=True, threshold=zero_threshold)
    logs = np.log(np.maximum(v, 1e-300))
    logr = np.log(r)
    A = np.column_stack([logr, np.ones_like(logr)])
    coef, *_ = np.linalg.lstsq(A, logs, rcond=None)
    slope, intercept = float(coef[0]), float(coef[1])
    resid = float(np.sqrt(np.mean((A @ coef - logs) ** 2)))
    return RateFit(radii=tuple(r), values=tuple(v), slope=slope,
                   constant=float(np.exp(intercept)), log_residual=resid,
                   zero_branch=False, threshold=zero_threshold)


def default_radii(box_size: float, count: int = 8, fraction: float = 0.1) -> tuple:
    """Geometric ladder r0 * 2^-i with r0 a fraction of the domain size."""
    r0 = fraction * box_size
    return tuple(r0 * 2.0 ** (-i) for i in range(count))
