"""Analytic test functions and named problem presets."""

import numpy as np

from exceptions import InvalidArgumentError
from problems.posterior import PosteriorSpec, gaussian_likelihood
from problems.qei import QeiSpec
from problems.sensitivity import SensitivitySpec, all_subsets, singletons

ISHIGAMI_A = 7.0
ISHIGAMI_B = 0.1


def ishigami(t, a: float = ISHIGAMI_A, b: float = ISHIGAMI_B):
    """``(1 + b t3^4) sin(t1) + a sin(t2)^2`` over the last axis of ``t``."""
    t = np.asarray(t, dtype=float)
    value = (1 + b * t[..., 2] ** 4) * np.sin(t[..., 0]) + a * np.sin(t[..., 1]) ** 2
    return float(value) if value.ndim == 0 else value


def ishigami_variances(a: float = ISHIGAMI_A, b: float = ISHIGAMI_B) -> tuple[float, dict[frozenset, float]]:
    """Total variance and the non-zero ANOVA components (0-based input sets)."""
    pi4, pi8 = np.pi**4, np.pi**8
    components = {
        frozenset({0}): b * pi4 / 5 + b**2 * pi8 / 50 + 0.5,
        frozenset({1}): a**2 / 8,
        frozenset({0, 2}): 8 * b**2 * pi8 / 225,
    }
    total = a**2 / 8 + b * pi4 / 5 + b**2 * pi8 / 18 + 0.5
    return total, components


def ishigami_indices(subsets, a: float = ISHIGAMI_A, b: float = ISHIGAMI_B) -> np.ndarray:
    """Analytic closed (row 0) and total (row 1) sensitivity indices for 1-based ``subsets``."""
    total, components = ishigami_variances(a, b)
    out = np.zeros((2, len(subsets)))
    for j, u in enumerate(subsets):
        u = frozenset(k - 1 for k in u)
        out[0, j] = sum(v for inputs, v in components.items() if inputs <= u) / total
        out[1, j] = sum(v for inputs, v in components.items() if inputs & u) / total
    return out


def ishigami_spec(subsets=None, a: float = ISHIGAMI_A, b: float = ISHIGAMI_B) -> SensitivitySpec:
    def phi(u: np.ndarray) -> np.ndarray:
        return ishigami(np.pi * (2 * u - 1), a, b)

    return SensitivitySpec(phi=phi, nu=3, subsets=tuple(all_subsets(3) if subsets is None else subsets))


def additive_spec(nu: int = 2, subsets=None) -> SensitivitySpec:
    """``phi(t) = sum(t)``; every singleton explains ``1/nu`` of the variance."""
    subsets = singletons(nu) if subsets is None else subsets
    return SensitivitySpec(phi=lambda u: u.sum(axis=1), nu=nu, subsets=tuple(subsets))


def constant_spec(nu: int = 2, subsets=None) -> SensitivitySpec:
    subsets = singletons(nu) if subsets is None else subsets
    return SensitivitySpec(phi=lambda u: np.ones(len(u)), nu=nu, subsets=tuple(subsets))


def conjugate_gaussian_spec(observations=(1.0, 1.0)) -> PosteriorSpec:
    """Prior ``N(0, 1)`` with unit-variance Gaussian likelihood."""
    return PosteriorSpec(dimension=1, likelihood=gaussian_likelihood, observations=np.asarray(observations))


def conjugate_gaussian_mean(observations=(1.0, 1.0)) -> float:
    observations = np.atleast_1d(np.asarray(observations, dtype=float))
    return float(observations.sum() / (len(observations) + 1))


def half_normal_spec() -> QeiSpec:
    """One batch of one standard normal point against incumbent 0; the mean is ``1/sqrt(2 pi)``."""
    return QeiSpec(means=[[0.0]], factors=[[[1.0]]], y_star=0.0)


HALF_NORMAL_MEAN = 1 / np.sqrt(2 * np.pi)


def linear(x: np.ndarray) -> np.ndarray:
    return x.sum(axis=1)


def product(x: np.ndarray) -> np.ndarray:
    return np.prod(x + 0.5, axis=1)


def constant(x: np.ndarray) -> np.ndarray:
    return np.full(len(x), 3.0)


INTEGRATE_PRESETS = {
    "linear": (linear, lambda d: d / 2),
    "product": (product, lambda d: 1.0),
    "constant": (constant, lambda d: 3.0),
}
SENSITIVITY_PRESETS = {"ishigami": ishigami_spec, "additive": additive_spec, "constant": constant_spec}
POSTERIOR_PRESETS = {"conjugate-gaussian": conjugate_gaussian_spec}
QEI_PRESETS = {"half-normal": half_normal_spec}


def integrate_preset(name: str):
    """``(function, exact_mean(d))`` for a named integration test function."""
    try:
        return INTEGRATE_PRESETS[name]
    except KeyError:
        raise InvalidArgumentError(f"Unknown integrate preset '{name}', expected one of {sorted(INTEGRATE_PRESETS)}")
