"""Error metrics, the stopping test and the minimax-optimal QOI estimate.

A metric ``h`` is usable only when it is a metric map (Lipschitz constant at
most 1). Under that condition ``|s - s_hat| <= h(s)`` holds for every ``s`` in
``[s_lo, s_hi]`` exactly when ``s_hi - s_lo <= h(s_lo) + h(s_hi)``, and the
estimate ``(s_lo + s_hi + h(s_lo) - h(s_hi)) / 2`` minimises the worst case.
"""

from collections.abc import Callable
from dataclasses import dataclass
from enum import StrEnum

import numpy as np

from exceptions import InvalidArgumentError, MetricEvaluationError, NoEstimateError

LIPSCHITZ_SLACK = 1e-12


class MetricKind(StrEnum):
    ABS_OR_REL = "abs-or-rel"
    ABS_AND_REL = "abs-and-rel"
    CUSTOM = "custom"


@dataclass(frozen=True)
class ErrorMetric:
    kind: MetricKind = MetricKind.ABS_OR_REL
    eps_abs: float = 0.0
    eps_rel: float = 0.0
    function: Callable | None = None
    check_domain: tuple[float, float] = (-10.0, 10.0)
    check_grid: int = 201

    def __post_init__(self):
        kind = MetricKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is MetricKind.CUSTOM:
            if self.function is None:
                raise InvalidArgumentError("A custom error metric needs a function")
            if not check_metric_map(self, self.check_domain, self.check_grid):
                raise InvalidArgumentError(
                    f"Custom error metric is not a metric map on {self.check_domain}: its Lipschitz constant exceeds 1"
                )
            return
        if self.eps_abs < 0:
            raise InvalidArgumentError(f"eps_abs must be non-negative, got {self.eps_abs}")
        if not 0 <= self.eps_rel < 1:
            raise InvalidArgumentError(f"eps_rel must lie in [0, 1) for a metric map, got {self.eps_rel}")
        if self.eps_abs == 0 and self.eps_rel == 0:
            raise InvalidArgumentError("At least one of eps_abs and eps_rel must be positive")

    @classmethod
    def absolute(cls, eps_abs: float) -> "ErrorMetric":
        return cls(MetricKind.ABS_OR_REL, eps_abs=eps_abs)

    def __call__(self, s):
        return h_eval(self, s)


def _evaluate(metric: ErrorMetric, s: np.ndarray) -> np.ndarray:
    if metric.kind is MetricKind.ABS_OR_REL:
        return np.maximum(metric.eps_abs, np.abs(s) * metric.eps_rel)
    if metric.kind is MetricKind.ABS_AND_REL:
        return np.minimum(metric.eps_abs, np.abs(s) * metric.eps_rel)
    values = np.asarray(metric.function(s), dtype=float)
    if values.shape != s.shape:
        values = np.vectorize(metric.function, otypes=[float])(s)
    if not np.isfinite(values).all() or (values < 0).any():
        raise MetricEvaluationError("Custom error metric returned a negative or non-finite value")
    return values


def h_eval(metric, s):
    """Evaluate ``h`` at ``s``; ``metric`` may be one metric or an object array of metrics shaped like ``s``."""
    s = np.asarray(s, dtype=float)
    if isinstance(metric, ErrorMetric):
        values = _evaluate(metric, s)
    else:
        metrics = np.broadcast_to(np.asarray(metric, dtype=object), s.shape)
        values = np.empty(s.shape)
        for index in np.ndindex(s.shape):
            values[index] = _evaluate(metrics[index], s[index])
    return float(values) if values.ndim == 0 else values


def check_metric_map(metric: ErrorMetric, domain=(-10.0, 10.0), grid_size: int = 201) -> bool:
    """True iff ``|h(s1) - h(s2)| <= |s1 - s2|`` for every pair of grid points on ``domain``."""
    a, b = domain
    if not a < b:
        raise InvalidArgumentError(f"Metric check domain is empty: [{a}, {b}]")
    if grid_size < 2:
        raise InvalidArgumentError(f"Metric check grid needs at least 2 points, got {grid_size}")
    grid = np.linspace(a, b, grid_size)
    h = _evaluate(metric, grid)
    if not np.isfinite(h).all():
        raise MetricEvaluationError("Error metric returned non-finite values on the check grid")
    dh = np.abs(h[:, None] - h[None, :])
    ds = np.abs(grid[:, None] - grid[None, :])
    return bool((dh <= ds * (1 + LIPSCHITZ_SLACK)).all())


def stopping_met(s_lo, s_hi, metric):
    """Elementwise stopping test ``s_hi - s_lo <= h(s_lo) + h(s_hi)``; infinite bounds never stop."""
    s_lo, s_hi = np.asarray(s_lo, dtype=float), np.asarray(s_hi, dtype=float)
    finite = np.isfinite(s_lo) & np.isfinite(s_hi)
    lo, hi = np.where(finite, s_lo, 0.0), np.where(finite, s_hi, 0.0)
    met = finite & (hi - lo <= np.asarray(h_eval(metric, lo)) + np.asarray(h_eval(metric, hi)))
    return bool(met) if met.ndim == 0 else met


def optimal_estimate(s_lo, s_hi, metric):
    """Minimax estimate ``(s_lo + s_hi + h(s_lo) - h(s_hi)) / 2``."""
    s_lo, s_hi = np.asarray(s_lo, dtype=float), np.asarray(s_hi, dtype=float)
    if not (np.isfinite(s_lo).all() and np.isfinite(s_hi).all()):
        raise NoEstimateError("No estimate exists for unbounded QOI bounds")
    estimate = (s_lo + s_hi + np.asarray(h_eval(metric, s_lo)) - np.asarray(h_eval(metric, s_hi))) / 2
    return float(estimate) if np.ndim(estimate) == 0 else estimate


def optimal_estimates(s_lo: np.ndarray, s_hi: np.ndarray, metric) -> np.ndarray:
    """Array variant of :func:`optimal_estimate` returning NaN where bounds are unbounded."""
    finite = np.isfinite(s_lo) & np.isfinite(s_hi)
    lo, hi = np.where(finite, s_lo, 0.0), np.where(finite, s_hi, 0.0)
    estimate = (lo + hi + np.asarray(h_eval(metric, lo)) - np.asarray(h_eval(metric, hi))) / 2
    return np.where(finite, estimate, np.nan)
