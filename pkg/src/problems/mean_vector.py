"""Problems whose QOI are the means themselves."""

from collections.abc import Callable

import numpy as np

from criteria import ErrorMetric
from driver import ProblemSpec, identity_dependency
from exceptions import InvalidArgumentError, ShapeError
from integrands import FunctionIntegrand, Integrand


def _as_shape(d_mu) -> tuple[int, ...]:
    if d_mu is None:
        return ()
    if np.ndim(d_mu) == 0:
        return (int(d_mu),)
    return tuple(int(k) for k in d_mu)


def make_mean_vector_problem(
    f: Integrand | Callable,
    d_mu,
    metrics: ErrorMetric | np.ndarray,
    alpha_s,
    dimension: int | None = None,
    name: str = "integrate",
) -> ProblemSpec:
    """Wrap ``f`` with identity bound functions and an identity dependency function.

    ``f`` is either an :class:`Integrand` or a vectorised callable mapping
    ``(n, dimension)`` nodes to ``(n, *d_mu)`` values, in which case
    ``dimension`` is required.
    """
    d_mu = _as_shape(d_mu)
    if isinstance(f, Integrand):
        if f.mean_shape != d_mu:
            raise ShapeError(f"Integrand mean shape {f.mean_shape} does not match requested shape {d_mu}")
        integrand = f
    else:
        if dimension is None:
            raise InvalidArgumentError("A plain callable needs an explicit node dimension")
        integrand = FunctionIntegrand(f, dimension, d_mu)
    return ProblemSpec(
        integrand=integrand,
        qoi_shape=d_mu,
        bound_lo=lambda lo, hi: lo,
        bound_hi=lambda lo, hi: hi,
        dependency=identity_dependency,
        alpha=alpha_s,
        metrics=metrics,
        name=name,
    )
