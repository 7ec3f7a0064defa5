"""Closed and total sensitivity indices from a pick-freeze integrand on ``(0, 1)^(2 nu)``.

Each node is split into halves ``(x, z)``. For subset ``u_j`` the closed
numerator is ``phi(x) [phi(x_u, z_-u) - phi(z)]`` and the total numerator is
``[phi(z) - phi(x_u, z_-u)]^2 / 2``; both are divided by the variance built
from the first and second moments of ``phi(x)``. The mean array is shaped
``(2, 3, c, *output_shape)``: axis 0 selects closed/total, axis 1 holds the
numerator, first moment and second moment, axis 2 the subset.
"""

import itertools
import logging
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from criteria import ErrorMetric
from driver import ProblemSpec, RunReport
from exceptions import AccountingError, InvalidArgumentError, InvalidSpecError, ShapeError
from integrands import Integrand
from intervals import BoundsArray, iv_clip, iv_div, iv_square, iv_sub

CLOSED, TOTAL = 0, 1
NUMERATOR, FIRST_MOMENT, SECOND_MOMENT = 0, 1, 2


def all_subsets(nu: int) -> list[tuple[int, ...]]:
    """Every non-empty subset of ``1..nu``, by size then lexicographically."""
    return [u for size in range(1, nu + 1) for u in itertools.combinations(range(1, nu + 1), size)]


def singletons(nu: int) -> list[tuple[int, ...]]:
    return [(j,) for j in range(1, nu + 1)]


@dataclass(frozen=True)
class SensitivitySpec:
    """``phi`` maps ``(n, nu)`` points of the unit cube to ``(n, *output_shape)``; subsets are 1-based."""

    phi: Callable
    nu: int
    subsets: tuple[tuple[int, ...], ...]
    output_shape: tuple[int, ...] = ()

    def __post_init__(self):
        if self.nu < 1:
            raise InvalidSpecError(f"Input dimension must be at least 1, got {self.nu}")
        subsets = tuple(tuple(sorted(int(k) for k in u)) for u in self.subsets)
        if not subsets:
            raise InvalidSpecError("At least one subset is required")
        for u in subsets:
            if not u:
                raise InvalidSpecError("Subsets must be non-empty")
            if len(set(u)) != len(u) or u[0] < 1 or u[-1] > self.nu:
                raise InvalidSpecError(f"Subset {u} must hold distinct inputs within 1..{self.nu}")
        object.__setattr__(self, "subsets", subsets)
        object.__setattr__(self, "output_shape", tuple(int(k) for k in self.output_shape))

    @property
    def dimension(self) -> int:
        return 2 * self.nu

    @property
    def mean_shape(self) -> tuple[int, ...]:
        return (2, 3, len(self.subsets), *self.output_shape)

    @property
    def qoi_shape(self) -> tuple[int, ...]:
        return (2, len(self.subsets), *self.output_shape)


class SensitivityIntegrand(Integrand):
    """Calls ``phi`` only on the points the requested outputs need."""

    def __init__(self, spec: SensitivitySpec):
        super().__init__(spec.dimension, spec.mean_shape)
        self.spec = spec
        self.columns = [np.array(u) - 1 for u in spec.subsets]

    def _needed(self, compute: np.ndarray) -> tuple[bool, bool, np.ndarray]:
        flags = np.asarray(compute, dtype=bool).reshape(2, 3, len(self.columns), -1).any(axis=3)
        need_x = bool(flags[CLOSED].any() or flags[TOTAL, FIRST_MOMENT:].any())
        need_z = bool(flags[:, NUMERATOR].any())
        mixes = flags[CLOSED, NUMERATOR] | flags[TOTAL, NUMERATOR]
        return need_x, need_z, mixes

    def model_calls_per_node(self, compute: np.ndarray) -> int:
        need_x, need_z, mixes = self._needed(compute)
        return int(need_x) + int(need_z) + int(mixes.sum())

    def _phi(self, points: np.ndarray) -> np.ndarray:
        values = np.asarray(self.spec.phi(points), dtype=float)
        expected = (len(points), *self.spec.output_shape)
        if values.shape != expected:
            raise ShapeError(f"Objective returned shape {values.shape}, expected {expected}")
        self.count_calls(len(points))
        return values

    def evaluate(self, x: np.ndarray, compute: np.ndarray) -> np.ndarray:
        nu = self.spec.nu
        xs, zs = x[:, :nu], x[:, nu:]
        flags = np.asarray(compute, dtype=bool).reshape(2, 3, len(self.columns), -1).any(axis=3)
        need_x, need_z, mixes = self._needed(compute)
        out = np.full((len(x), *self.mean_shape), np.nan)
        fx = self._phi(xs) if need_x else None
        fz = self._phi(zs) if need_z else None
        for j in np.flatnonzero(mixes):
            mixed = zs.copy()
            mixed[:, self.columns[j]] = xs[:, self.columns[j]]
            fm = self._phi(mixed)
            if flags[CLOSED, NUMERATOR, j]:
                out[:, CLOSED, NUMERATOR, j] = fx * (fm - fz)
            if flags[TOTAL, NUMERATOR, j]:
                out[:, TOTAL, NUMERATOR, j] = 0.5 * (fz - fm) ** 2
        if fx is not None:
            # moments are repeated for every (closed/total, subset) pair so each QOI owns its own copy
            moments = fx[:, None, None]
            out[:, :, FIRST_MOMENT] = moments
            out[:, :, SECOND_MOMENT] = moments**2
        return out


def index_bounds(mu_lo: np.ndarray, mu_hi: np.ndarray) -> BoundsArray:
    """Bounds on ``numerator / (second moment - first moment^2)`` clipped to ``[0, 1]``.

    Sobol' indices are non-negative, so the numerator is clamped at 0. Where
    the variance lower bound is not positive nothing beyond ``[0, 1]`` is known.
    """
    mu = BoundsArray(mu_lo, mu_hi)
    numerator = BoundsArray(np.maximum(mu.lo[:, NUMERATOR], 0.0), np.maximum(mu.hi[:, NUMERATOR], 0.0))
    variance = iv_sub(mu[:, SECOND_MOMENT], iv_square(mu[:, FIRST_MOMENT]))
    ratio = iv_clip(iv_div(numerator, variance), 0.0, 1.0)
    positive = variance.lo > 0
    return BoundsArray(np.where(positive, ratio.lo, 0.0), np.where(positive, ratio.hi, 1.0))


def broadcast_flags(flags: np.ndarray) -> np.ndarray:
    flags = np.asarray(flags, dtype=bool)
    return np.repeat(flags[:, None], 3, axis=1)


def make_sensitivity_problem(spec: SensitivitySpec, metrics: ErrorMetric | np.ndarray, alpha_s) -> ProblemSpec:
    return ProblemSpec(
        integrand=SensitivityIntegrand(spec),
        qoi_shape=spec.qoi_shape,
        bound_lo=lambda lo, hi: index_bounds(lo, hi).lo,
        bound_hi=lambda lo, hi: index_bounds(lo, hi).hi,
        dependency=broadcast_flags,
        alpha=alpha_s,
        metrics=metrics,
        name="sensitivity",
    )


def cost_tally(problem: ProblemSpec, report: RunReport) -> np.ndarray:
    """Objective calls per node for every iteration of ``report``, checked against the recorded call counts."""
    integrand = problem.integrand
    if not isinstance(integrand, SensitivityIntegrand):
        raise InvalidArgumentError("Cost tallies apply to sensitivity problems only")
    sequences = report.samples // report.n_total if report.n_total else 1
    full = 2 + len(integrand.columns)
    per_node = []
    for record in report.history:
        calls = integrand.model_calls_per_node(~record.stopped_means)
        expected = record.nodes * sequences * calls
        if record.model_calls != expected:
            raise AccountingError(
                f"Iteration {record.iteration} made {record.model_calls} objective calls, "
                f"expected {record.nodes} nodes x {sequences} sequences x {calls} calls"
            )
        if not record.stopped_means.any() and calls != full:
            raise AccountingError(f"Fully evaluated nodes must cost {full} objective calls, got {calls}")
        per_node.append(calls)
    logging.debug(f"Objective calls per node by iteration: {per_node}")
    return np.array(per_node, dtype=int)
