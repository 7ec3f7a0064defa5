"""q-Expected Improvement over a finite set of candidate batches.

Each candidate batch ``i`` has a posterior mean ``m_i`` and a covariance
factor ``A_i``; the acquisition value is ``E[max_k (A_i Z + m_i - y*)_+]``
with ``Z`` standard normal, obtained from uniform nodes by the elementwise
normal quantile.
"""

from dataclasses import dataclass

import numpy as np

from criteria import ErrorMetric
from driver import ProblemSpec
from exceptions import InvalidSpecError
from integrands import Integrand
from problems.mean_vector import make_mean_vector_problem
from stats import normal_quantile


@dataclass(frozen=True)
class QeiSpec:
    means: np.ndarray
    factors: np.ndarray
    y_star: float

    def __post_init__(self):
        means = np.atleast_2d(np.asarray(self.means, dtype=float))
        factors = np.asarray(self.factors, dtype=float)
        if factors.ndim == 2:
            factors = np.broadcast_to(factors, (means.shape[0], *factors.shape))
        batches, d = means.shape
        if d < 1 or batches < 1:
            raise InvalidSpecError("qEI needs at least one batch with at least one point")
        if factors.shape != (batches, d, d):
            raise InvalidSpecError(f"Covariance factors must have shape {(batches, d, d)}, got {factors.shape}")
        if not (np.isfinite(means).all() and np.isfinite(factors).all() and np.isfinite(self.y_star)):
            raise InvalidSpecError("qEI means, covariance factors and incumbent must be finite")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "factors", np.array(factors))
        object.__setattr__(self, "y_star", float(self.y_star))

    @property
    def batches(self) -> int:
        return self.means.shape[0]

    @property
    def dimension(self) -> int:
        return self.means.shape[1]


class QeiIntegrand(Integrand):
    def __init__(self, spec: QeiSpec):
        super().__init__(spec.dimension, (spec.batches,))
        self.spec = spec

    def evaluate(self, x: np.ndarray, compute: np.ndarray) -> np.ndarray:
        out = np.full((len(x), self.spec.batches), np.nan)
        batches = np.flatnonzero(compute)
        if not batches.size or not len(x):
            return out
        z = np.asarray(normal_quantile(x)).reshape(len(x), self.dimension)
        # explicit contraction keeps every row independent of the block size
        y = np.einsum("bij,nj->nbi", self.spec.factors[batches], z) + self.spec.means[batches] - self.spec.y_star
        out[:, batches] = np.maximum(y, 0.0).max(axis=2)
        self.count_calls(len(x))
        return out


def make_qei_integrand(spec: QeiSpec) -> QeiIntegrand:
    return QeiIntegrand(spec)


def make_qei_problem(spec: QeiSpec, metrics: ErrorMetric | np.ndarray, alpha_s) -> ProblemSpec:
    return make_mean_vector_problem(make_qei_integrand(spec), (spec.batches,), metrics, alpha_s, name="qei")
