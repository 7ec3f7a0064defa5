"""Bayesian posterior means written as a ratio of two prior expectations."""

from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from criteria import ErrorMetric
from driver import ProblemSpec
from exceptions import IntegrandEvaluationError, InvalidSpecError
from integrands import Integrand
from intervals import BoundsArray, iv_div
from stats import normal_quantile


def standard_normal_prior(u: np.ndarray) -> np.ndarray:
    return np.asarray(normal_quantile(u)).reshape(np.shape(u))


def gaussian_likelihood(y: float, theta: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """Density of ``N(theta[:, 0], scale^2)`` at ``y``."""
    return np.exp(-0.5 * ((y - theta[:, 0]) / scale) ** 2) / (scale * np.sqrt(2 * np.pi))


@dataclass(frozen=True)
class PosteriorSpec:
    """``prior`` maps uniform nodes ``(n, dimension)`` to prior draws; ``likelihood(y_i, theta)`` returns ``(n,)``."""

    dimension: int
    likelihood: Callable
    observations: np.ndarray = field(default_factory=lambda: np.empty(0))
    prior: Callable = standard_normal_prior

    def __post_init__(self):
        if self.dimension < 1:
            raise InvalidSpecError(f"Parameter dimension must be at least 1, got {self.dimension}")
        object.__setattr__(self, "observations", np.atleast_1d(np.asarray(self.observations, dtype=float)))


class PosteriorIntegrand(Integrand):
    """Row 0 holds ``theta_k * L(theta)``, row 1 the likelihood product ``L(theta)`` repeated per ``k``."""

    def __init__(self, spec: PosteriorSpec):
        super().__init__(spec.dimension, (2, spec.dimension))
        self.spec = spec

    def likelihood_product(self, theta: np.ndarray) -> np.ndarray:
        product = np.ones(len(theta))
        for y in self.spec.observations:
            values = np.asarray(self.spec.likelihood(y, theta), dtype=float).reshape(len(theta))
            if not np.isfinite(values).all() or (values < 0).any():
                row = int(np.flatnonzero(~np.isfinite(values) | (values < 0))[0])
                raise IntegrandEvaluationError(
                    f"Likelihood of observation {y} is negative or non-finite at node offset {row}", index=row
                )
            product *= values
        return product

    def evaluate(self, x: np.ndarray, compute: np.ndarray) -> np.ndarray:
        theta = np.asarray(self.spec.prior(x), dtype=float).reshape(len(x), self.dimension)
        weight = self.likelihood_product(theta)
        self.count_calls(len(x))
        return np.stack([theta * weight[:, None], np.repeat(weight[:, None], self.dimension, axis=1)], axis=1)


def _quotient(mu_lo: np.ndarray, mu_hi: np.ndarray) -> BoundsArray:
    return iv_div(BoundsArray(mu_lo[0], mu_hi[0]), BoundsArray(mu_lo[1], mu_hi[1]))


def stack_flags(flags: np.ndarray) -> np.ndarray:
    flags = np.asarray(flags, dtype=bool)
    return np.stack([flags, flags])


def make_posterior_mean_problem(spec: PosteriorSpec, metrics: ErrorMetric | np.ndarray, alpha_s) -> ProblemSpec:
    return ProblemSpec(
        integrand=PosteriorIntegrand(spec),
        qoi_shape=(spec.dimension,),
        bound_lo=lambda lo, hi: _quotient(lo, hi).lo,
        bound_hi=lambda lo, hi: _quotient(lo, hi).hi,
        dependency=stack_flags,
        alpha=alpha_s,
        metrics=metrics,
        name="posterior-mean",
    )
