from .benchmarks import (
    HALF_NORMAL_MEAN,
    INTEGRATE_PRESETS,
    POSTERIOR_PRESETS,
    QEI_PRESETS,
    SENSITIVITY_PRESETS,
    additive_spec,
    conjugate_gaussian_mean,
    conjugate_gaussian_spec,
    constant_spec,
    half_normal_spec,
    integrate_preset,
    ishigami,
    ishigami_indices,
    ishigami_spec,
)
from .mean_vector import make_mean_vector_problem
from .posterior import PosteriorSpec, gaussian_likelihood, make_posterior_mean_problem
from .qei import QeiSpec, make_qei_integrand, make_qei_problem
from .sensitivity import (
    SensitivityIntegrand,
    SensitivitySpec,
    all_subsets,
    cost_tally,
    index_bounds,
    make_sensitivity_problem,
    singletons,
)

__all__ = [
    "HALF_NORMAL_MEAN",
    "INTEGRATE_PRESETS",
    "POSTERIOR_PRESETS",
    "QEI_PRESETS",
    "SENSITIVITY_PRESETS",
    "PosteriorSpec",
    "QeiSpec",
    "SensitivityIntegrand",
    "SensitivitySpec",
    "additive_spec",
    "all_subsets",
    "conjugate_gaussian_mean",
    "conjugate_gaussian_spec",
    "constant_spec",
    "cost_tally",
    "gaussian_likelihood",
    "half_normal_spec",
    "index_bounds",
    "integrate_preset",
    "ishigami",
    "ishigami_indices",
    "ishigami_spec",
    "make_mean_vector_problem",
    "make_posterior_mean_problem",
    "make_qei_integrand",
    "make_qei_problem",
    "make_sensitivity_problem",
    "singletons",
]
