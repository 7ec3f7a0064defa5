"""Turns a validated :class:`RunConfig` into a problem, a sequence and a bounder, and runs it."""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import special

import driver
from bounders import BounderConfig
from configuration import Command, RunConfig
from criteria import ErrorMetric
from driver import ProblemSpec, RunReport
from problems import (
    QeiSpec,
    additive_spec,
    conjugate_gaussian_mean,
    conjugate_gaussian_spec,
    constant_spec,
    integrate_preset,
    ishigami_indices,
    ishigami_spec,
    make_mean_vector_problem,
    make_posterior_mean_problem,
    make_qei_problem,
    make_sensitivity_problem,
)
from sequences import SequenceSpec


@dataclass
class PreparedRun:
    problem: ProblemSpec
    sequence: SequenceSpec
    bounder: BounderConfig
    reference: np.ndarray | None = None


def build_metric(config: RunConfig) -> ErrorMetric:
    return ErrorMetric(config.metric, eps_abs=config.eps_abs, eps_rel=config.eps_rel)


def half_normal_improvement(y_star: float) -> float:
    """``E[max(Z - y*, 0)]`` for standard normal ``Z``."""
    return float(np.exp(-0.5 * y_star**2) / np.sqrt(2 * np.pi) - y_star * (1 - special.ndtr(y_star)))


def _sensitivity(config: RunConfig, metric: ErrorMetric) -> tuple[ProblemSpec, np.ndarray | None]:
    preset = config.active_preset
    if preset == "ishigami":
        spec = ishigami_spec(config.resolve_subsets(3), config.ishigami_a, config.ishigami_b)
        reference = ishigami_indices(spec.subsets, config.ishigami_a, config.ishigami_b)
    elif preset == "additive":
        spec = additive_spec(config.dimension, config.resolve_subsets(config.dimension))
        shares = np.array([len(u) / config.dimension for u in spec.subsets])
        reference = np.stack([shares, shares])
    else:
        spec = constant_spec(config.dimension, config.resolve_subsets(config.dimension))
        reference = None
    return make_sensitivity_problem(spec, metric, config.alpha), reference


def build_problem(config: RunConfig) -> tuple[ProblemSpec, np.ndarray | None]:
    """The configured problem and its analytic answer when one is known."""
    metric = build_metric(config)
    if config.command in (Command.INTEGRATE, Command.CONVERGENCE):
        function, exact = integrate_preset(config.active_preset)
        problem = make_mean_vector_problem(function, (), metric, config.alpha, dimension=config.dimension)
        return problem, np.asarray(exact(config.dimension), dtype=float)
    if config.command is Command.SENSITIVITY:
        return _sensitivity(config, metric)
    if config.command is Command.POSTERIOR_MEAN:
        spec = conjugate_gaussian_spec(config.observations)
        problem = make_posterior_mean_problem(spec, metric, config.alpha)
        return problem, np.array([conjugate_gaussian_mean(config.observations)])
    y_star = 0.0 if config.y_star is None else config.y_star
    spec = QeiSpec(means=[[0.0]], factors=[[[1.0]]], y_star=y_star)
    return make_qei_problem(spec, metric, config.alpha), np.array([half_normal_improvement(y_star)])


def prepare(config: RunConfig) -> PreparedRun:
    problem, reference = build_problem(config)
    sequence = SequenceSpec(config.sequence, problem.dimension, seed=config.seed, randomization=config.randomization)
    bounder = BounderConfig(config.bounder, inflation=config.inflation, replications=config.replications)
    return PreparedRun(problem=problem, sequence=sequence, bounder=bounder, reference=reference)


def execute(config: RunConfig) -> tuple[PreparedRun, RunReport]:
    prepared = prepare(config)
    logging.info(
        f"Command {config.command} with preset '{config.active_preset}', seed {config.seed}, {config.workers} workers"
    )
    report = driver.run(
        prepared.problem,
        prepared.sequence,
        prepared.bounder,
        m1=config.m1,
        max_samples=config.max_samples,
        workers=config.workers,
    )
    return prepared, report
