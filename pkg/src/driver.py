"""Adaptive (quasi-)Monte Carlo for array quantities of interest.

The loop doubles the node range until every QOI satisfies its stopping test.
Mean bounds come from a scalar bounder applied elementwise, are propagated to
QOI bounds through the problem's ``C-``/``C+`` pair, and the dependency
function turns converged QOI into stopped means that are no longer evaluated.
"""

import logging
import time
from collections.abc import Callable
from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np

from bounders import BounderConfig, BounderKind, new_state
from criteria import ErrorMetric, h_eval, optimal_estimates, stopping_met
from evaluation import Evaluation, EvaluationPool
from exceptions import DependencyStructureError, InvalidArgumentError, ShapeError
from integrands import Integrand
from intervals import BoundsArray, apply_bound_pair
from sequences import PointBlock, SequenceSpec, gen, replicate

DUPLICATION_HINT = (
    "Each mean must be a dependency of exactly one QOI. If two QOI share a mean, duplicate that integrand output "
    "(e.g. copy mu_1 into a new mu_4 and let the second QOI use mu_4) so ownership is unique."
)
MONOTONICITY_PROBES = 8


def identity_dependency(flags: np.ndarray) -> np.ndarray:
    return np.asarray(flags, dtype=bool)


@dataclass
class ProblemSpec:
    integrand: Integrand
    qoi_shape: tuple[int, ...]
    bound_lo: Callable
    bound_hi: Callable
    dependency: Callable
    alpha: np.ndarray
    metrics: ErrorMetric | np.ndarray
    name: str = "problem"

    def __post_init__(self):
        self.qoi_shape = tuple(int(k) for k in self.qoi_shape)
        alpha = np.asarray(self.alpha, dtype=float)
        try:
            self.alpha = np.broadcast_to(alpha, self.qoi_shape).copy()
        except ValueError as e:
            raise ShapeError(f"alpha of shape {alpha.shape} does not fit QOI shape {self.qoi_shape}") from e
        if not np.all((self.alpha > 0) & (self.alpha < 1)):
            raise InvalidArgumentError("Every QOI uncertainty level must lie in (0, 1)")
        if not isinstance(self.metrics, ErrorMetric):
            metrics = np.asarray(self.metrics, dtype=object)
            if metrics.shape != self.qoi_shape:
                raise ShapeError(f"Metric array shape {metrics.shape} does not match QOI shape {self.qoi_shape}")
            self.metrics = metrics

    @property
    def mean_shape(self) -> tuple[int, ...]:
        return self.integrand.mean_shape

    @property
    def dimension(self) -> int:
        return self.integrand.dimension


class RunStatus(StrEnum):
    CONVERGED = "converged"
    BUDGET_EXHAUSTED = "budget-exhausted"


@dataclass
class IterationRecord:
    iteration: int
    n_start: int
    n_end: int
    nodes: int
    stopped_means: np.ndarray = field(repr=False)
    active_means: int
    converged_qoi: int
    output_evaluations: int
    model_calls: int
    max_active_width: float


@dataclass
class RunReport:
    s_hat: np.ndarray
    s_bounds: BoundsArray
    mu_bounds: BoundsArray
    n_total: int
    samples: int
    eval_counts: np.ndarray
    converged: np.ndarray
    iterations: int
    status: RunStatus
    model_calls: int
    history: list[IterationRecord] = field(default_factory=list, repr=False)
    wall_time: float = 0.0

    @property
    def all_converged(self) -> bool:
        return bool(self.converged.all())


def _probe(dependency: Callable, flags: np.ndarray, mean_shape: tuple[int, ...]) -> np.ndarray:
    out = np.asarray(dependency(flags.copy()), dtype=bool)
    if out.shape != mean_shape:
        raise DependencyStructureError(f"Dependency function returned shape {out.shape}, expected {mean_shape}")
    return out


def validate_dependency(dependency: Callable, qoi_shape, mean_shape) -> np.ndarray:
    """Probe ``D`` with one-hot QOI flags and return the ownership matrix (QOI x mean)."""
    qoi_shape, mean_shape = tuple(qoi_shape), tuple(mean_shape)
    n_qoi = int(np.prod(qoi_shape, dtype=int))
    if _probe(dependency, np.zeros(qoi_shape, dtype=bool), mean_shape).any():
        raise DependencyStructureError("Dependency function must keep every mean active when no QOI has converged")
    rows = []
    for position in range(n_qoi):
        flags = np.zeros(n_qoi, dtype=bool)
        flags[position] = True
        rows.append(_probe(dependency, flags.reshape(qoi_shape), mean_shape).ravel())
    matrix = np.array(rows, dtype=bool).reshape(n_qoi, -1)

    owners = matrix.sum(axis=0)
    if (owners != 1).any():
        k = int(np.flatnonzero(owners != 1)[0])
        mean_index = np.unravel_index(k, mean_shape) if mean_shape else ()
        raise DependencyStructureError(
            f"Mean index {tuple(int(i) for i in mean_index)} is a dependency of {int(owners[k])} QOI. "
            f"{DUPLICATION_HINT}"
        )
    if not _probe(dependency, np.ones(qoi_shape, dtype=bool), mean_shape).all():
        raise DependencyStructureError("Dependency function must stop every mean when all QOI have converged")

    rng = np.random.default_rng(0)
    for _ in range(MONOTONICITY_PROBES if n_qoi > 1 else 0):
        flags = rng.random(n_qoi) < 0.5
        expected = matrix[flags].any(axis=0)
        if not np.array_equal(_probe(dependency, flags.reshape(qoi_shape), mean_shape).ravel(), expected):
            raise DependencyStructureError(
                "Dependency function is not monotone: stopping a set of QOI must stop exactly the means they own"
            )
    logging.debug(f"Dependency ownership counts per QOI: {matrix.sum(axis=1).tolist()}")
    return matrix


def allocate_alpha(dep_matrix: np.ndarray, alpha_s, mean_shape=None) -> np.ndarray:
    """Split each QOI's uncertainty evenly over the means it owns (Boole's inequality)."""
    dep_matrix = np.asarray(dep_matrix, dtype=bool)
    alpha_s = np.asarray(alpha_s, dtype=float).ravel()
    owned = dep_matrix.sum(axis=1)
    with np.errstate(divide="ignore"):
        share = alpha_s / owned
    candidates = np.where(dep_matrix, share[:, None], np.inf)
    alpha_mu = candidates.min(axis=0)
    if np.isinf(alpha_mu).any():
        raise DependencyStructureError(f"Some means are owned by no QOI. {DUPLICATION_HINT}")
    return alpha_mu if mean_shape is None else alpha_mu.reshape(tuple(mean_shape))


def evaluate_masked(integrand: Integrand, points, mask, workers: int = 1, first_index: int = 1) -> Evaluation:
    """Evaluate ``integrand`` where ``mask`` is False; stopped outputs are never requested."""
    values = points.values if isinstance(points, PointBlock) else np.asarray(points, dtype=float)
    return EvaluationPool(integrand, workers).evaluate(values, mask, first_index)


def _next_range(n_start: int, n_end: int, low_discrepancy: bool) -> tuple[int, int]:
    if low_discrepancy:
        # keep cumulative sizes at powers of two so prefixes stay balanced designs
        return n_end + 1, 2 * n_end
    n_start = n_end + 1
    return n_start, 2 * n_start


def nest_bounds(prev_lo, prev_hi, lo, hi) -> tuple[np.ndarray, np.ndarray]:
    """Intersect new mean bounds with the previous ones so that widths never grow.

    Disjoint intervals fall back to the new interval, narrowed around its centre
    to at most the previous width.
    """
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    nested_lo, nested_hi = np.maximum(lo, prev_lo), np.minimum(hi, prev_hi)
    disjoint = nested_lo > nested_hi
    if disjoint.any():
        centre = (lo + hi) / 2
        half = np.minimum(hi - lo, prev_hi - prev_lo) / 2
        nested_lo = np.where(disjoint, centre - half, nested_lo)
        nested_hi = np.where(disjoint, centre + half, nested_hi)
    return nested_lo, nested_hi


def planned_ranges(m1: int, max_samples: int, low_discrepancy: bool) -> list[tuple[int, int]]:
    """Node ranges the loop would visit if no QOI ever converged."""
    ranges = []
    n_start, n_end = 1, 2**m1
    while n_end <= max_samples:
        ranges.append((n_start, n_end))
        n_start, n_end = _next_range(n_start, n_end, low_discrepancy)
    return ranges


def run(
    problem: ProblemSpec,
    seq: SequenceSpec,
    bounder: BounderConfig,
    m1: int = 10,
    max_samples: int = 2**20,
    workers: int = 1,
) -> RunReport:
    """Sample until every QOI meets its stopping test or the node budget runs out."""
    start_time = time.time()
    if m1 < 1 or 2**m1 > max_samples:
        raise InvalidArgumentError(f"Initial sample size 2^{m1} must be at least 2 and within budget {max_samples}")
    if seq.dimension != problem.dimension:
        raise ShapeError(f"Sequence dimension {seq.dimension} differs from integrand dimension {problem.dimension}")
    if bounder.kind is BounderKind.CLT and seq.kind.is_low_discrepancy:
        raise InvalidArgumentError("The CLT bounder needs IID nodes; use replications for low-discrepancy sequences")
    specs = [seq] if bounder.kind is BounderKind.CLT else replicate(seq, bounder.replications)

    mean_shape, qoi_shape = problem.mean_shape, problem.qoi_shape
    dep_matrix = validate_dependency(problem.dependency, qoi_shape, mean_shape)
    alpha_mu = allocate_alpha(dep_matrix, problem.alpha, mean_shape)
    state = new_state(bounder, mean_shape)
    pool = EvaluationPool(problem.integrand, workers)

    mu_lo, mu_hi = np.full(mean_shape, -np.inf), np.full(mean_shape, np.inf)
    s_bounds = BoundsArray.unbounded(qoi_shape)
    flags_s = np.zeros(qoi_shape, dtype=bool)
    flags_mu = np.zeros(mean_shape, dtype=bool)
    eval_counts = np.zeros(mean_shape, dtype=np.int64)
    history: list[IterationRecord] = []
    model_calls = 0
    n_start, n_end, n_total = 1, 2**m1, 0
    status = RunStatus.CONVERGED
    logging.info(
        f"Running '{problem.name}': mean shape {mean_shape}, QOI shape {qoi_shape}, "
        f"{seq.kind} x {len(specs)}, {bounder.kind} bounder"
    )

    while not flags_s.all():
        if n_end > max_samples:
            status = RunStatus.BUDGET_EXHAUSTED
            logging.warning(
                f"Budget of {max_samples} nodes exhausted with {int(flags_s.sum())}/{flags_s.size} QOI converged"
            )
            break
        stopped = flags_mu.copy()
        points = np.concatenate([gen(spec, n_start, n_end).values for spec in specs])
        nodes = n_end - n_start + 1
        copy_nodes = nodes if len(specs) > 1 else None
        evaluation = pool.evaluate(points, stopped, first_index=n_start, block_nodes=copy_nodes)
        values = evaluation.values.reshape((len(specs), nodes, *mean_shape))
        state = state.update(values[0] if bounder.kind is BounderKind.CLT else values, active=~stopped)
        eval_counts += np.where(stopped, 0, nodes * len(specs))
        model_calls += evaluation.model_calls
        n_total = n_end

        lo, hi = state.bounds(alpha_mu, bounder.inflation)
        if bounder.kind is BounderKind.REPLICATIONS:
            lo, hi = nest_bounds(mu_lo, mu_hi, lo, hi)
        mu_lo, mu_hi = np.where(stopped, mu_lo, lo), np.where(stopped, mu_hi, hi)
        s_bounds = apply_bound_pair(problem.bound_lo, problem.bound_hi, BoundsArray(mu_lo, mu_hi), qoi_shape)
        flags_s = np.asarray(flags_s | stopping_met(s_bounds.lo, s_bounds.hi, problem.metrics), dtype=bool)
        flags_mu = np.asarray(problem.dependency(flags_s.copy()), dtype=bool)

        widths = (mu_hi - mu_lo)[~stopped]
        history.append(
            IterationRecord(
                iteration=len(history) + 1,
                n_start=n_start,
                n_end=n_end,
                nodes=nodes,
                stopped_means=stopped,
                active_means=int((~stopped).sum()),
                converged_qoi=int(flags_s.sum()),
                output_evaluations=evaluation.output_evaluations,
                model_calls=evaluation.model_calls,
                max_active_width=float(widths.max()) if widths.size else 0.0,
            )
        )
        logging.info(
            f"Iteration {len(history)}: nodes {n_start}-{n_end}, {int(flags_s.sum())}/{flags_s.size} QOI converged, "
            f"{evaluation.output_evaluations} output evaluations"
        )
        n_start, n_end = _next_range(n_start, n_end, seq.kind.is_low_discrepancy)

    s_hat = optimal_estimates(s_bounds.lo, s_bounds.hi, problem.metrics)
    wall_time = time.time() - start_time
    logging.info(
        f"Finished '{problem.name}' ({status}) after {len(history)} iterations and {n_total} nodes "
        f"in {wall_time:.2f}s"
    )
    logging.debug(f"Tolerances at the returned bounds: {h_eval(problem.metrics, np.nan_to_num(s_hat))}")
    return RunReport(
        s_hat=s_hat,
        s_bounds=s_bounds,
        mu_bounds=BoundsArray(mu_lo, mu_hi),
        n_total=n_total,
        samples=n_total * len(specs),
        eval_counts=eval_counts,
        converged=flags_s,
        iterations=len(history),
        status=status,
        model_calls=model_calls,
        history=history,
        wall_time=wall_time,
    )
