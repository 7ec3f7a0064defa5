"""Scalar mean bounders applied elementwise over the mean array.

Two backends are provided: a CLT bound on IID samples and a Student-t bound
over independent randomizations of a low-discrepancy sequence. States keep
running sums per mean index; indices outside the ``active`` mask are left
untouched so frozen bounds stay frozen.
"""

from dataclasses import dataclass
from enum import StrEnum

import numpy as np

from exceptions import InsufficientDataError, IntegrandEvaluationError, InvalidArgumentError
from stats import normal_quantile, t_quantile

DEFAULT_INFLATION = 1.2
DEFAULT_REPLICATIONS = 16


class BounderKind(StrEnum):
    CLT = "clt-iid"
    REPLICATIONS = "replications"


@dataclass(frozen=True)
class BounderConfig:
    kind: BounderKind = BounderKind.REPLICATIONS
    inflation: float = DEFAULT_INFLATION
    replications: int = DEFAULT_REPLICATIONS

    def __post_init__(self):
        object.__setattr__(self, "kind", BounderKind(self.kind))
        if not self.inflation >= 1:
            raise InvalidArgumentError(f"Inflation factor must be at least 1, got {self.inflation}")
        if self.kind is BounderKind.REPLICATIONS and self.replications < 2:
            raise InvalidArgumentError(f"At least 2 replications are required, got {self.replications}")


def _kahan_add(total: np.ndarray, err: np.ndarray, increment: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    y = increment - err
    t = total + y
    return t, (t - total) - y


def _checked(evals: np.ndarray, active: np.ndarray, sample_axes: int) -> np.ndarray:
    """Zero out inactive entries and reject non-finite active ones."""
    bad = ~np.isfinite(evals) & active
    if bad.any():
        index = tuple(int(i) for i in np.argwhere(bad)[0])
        raise IntegrandEvaluationError(
            f"Integrand returned a non-finite value at sample {index[:sample_axes]}, "
            f"mean index {index[sample_axes:]}",
            index=index,
        )
    return np.where(active, evals, 0.0)


def _active_mask(active, shape) -> np.ndarray:
    return np.ones(shape, dtype=bool) if active is None else np.broadcast_to(np.asarray(active, dtype=bool), shape)


@dataclass(frozen=True)
class CltState:
    n: np.ndarray
    total: np.ndarray
    total_sq: np.ndarray
    total_err: np.ndarray
    total_sq_err: np.ndarray

    @classmethod
    def empty(cls, shape=()) -> "CltState":
        zeros = np.zeros(shape)
        return cls(np.zeros(shape, dtype=np.int64), zeros, zeros, zeros, zeros)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.n.shape

    def update(self, evals, active=None) -> "CltState":
        """Advance sums with a block of evaluations shaped ``(n, *shape)``."""
        evals = np.asarray(evals, dtype=float).reshape((-1, *self.shape))
        active = _active_mask(active, self.shape)
        values = _checked(evals, active, 1)
        total, total_err = _kahan_add(self.total, self.total_err, values.sum(axis=0))
        total_sq, total_sq_err = _kahan_add(self.total_sq, self.total_sq_err, (values**2).sum(axis=0))
        n = self.n + np.where(active, evals.shape[0], 0)
        return CltState(n, total, total_sq, total_err, total_sq_err)

    @property
    def mean(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return self.total / self.n

    @property
    def std(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            variance = (self.total_sq - self.total**2 / self.n) / (self.n - 1)
        return np.sqrt(np.maximum(variance, 0.0))

    def bounds(self, alpha, inflation: float = DEFAULT_INFLATION) -> tuple[np.ndarray, np.ndarray]:
        if np.any(self.n < 2):
            raise InsufficientDataError("CLT bounds need at least 2 samples per mean index")
        z = normal_quantile(1 - np.asarray(alpha) / 2)
        half = inflation * z * self.std / np.sqrt(self.n)
        return self.mean - half, self.mean + half


@dataclass(frozen=True)
class RepState:
    n: np.ndarray
    totals: np.ndarray
    totals_err: np.ndarray

    @classmethod
    def empty(cls, replications: int, shape=()) -> "RepState":
        if replications < 2:
            raise InsufficientDataError(f"At least 2 replications are required, got {replications}")
        zeros = np.zeros((replications, *shape))
        return cls(np.zeros(shape, dtype=np.int64), zeros, zeros)

    @property
    def replications(self) -> int:
        return self.totals.shape[0]

    @property
    def shape(self) -> tuple[int, ...]:
        return self.n.shape

    def update(self, evals, active=None) -> "RepState":
        """Advance every replicate with a block shaped ``(R, n, *shape)``."""
        evals = np.asarray(evals, dtype=float).reshape((self.replications, -1, *self.shape))
        active = _active_mask(active, self.shape)
        values = _checked(evals, active, 2)
        totals, totals_err = _kahan_add(self.totals, self.totals_err, values.sum(axis=1))
        n = self.n + np.where(active, evals.shape[1], 0)
        return RepState(n, totals, totals_err)

    @property
    def replicate_means(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return self.totals / self.n

    @property
    def mean(self) -> np.ndarray:
        return self.replicate_means.mean(axis=0)

    def bounds(self, alpha, inflation: float = DEFAULT_INFLATION) -> tuple[np.ndarray, np.ndarray]:
        if np.any(self.n < 1):
            raise InsufficientDataError("Replicated bounds need at least 1 sample per replicate")
        means = self.replicate_means
        center = means.mean(axis=0)
        t = t_quantile(1 - np.asarray(alpha) / 2, self.replications - 1)
        half = inflation * t * means.std(axis=0, ddof=1) / np.sqrt(self.replications)
        return center - half, center + half


BounderState = CltState | RepState


def new_state(config: BounderConfig, shape=()) -> BounderState:
    if config.kind is BounderKind.CLT:
        return CltState.empty(shape)
    return RepState.empty(config.replications, shape)


def update(state: BounderState, evals, active=None) -> BounderState:
    return state.update(evals, active)


def clt_bounds(state: CltState, alpha, inflation: float = DEFAULT_INFLATION) -> tuple[np.ndarray, np.ndarray]:
    return state.bounds(alpha, inflation)


def rep_bounds(state: RepState, alpha, inflation: float = DEFAULT_INFLATION) -> tuple[np.ndarray, np.ndarray]:
    return state.bounds(alpha, inflation)
