"""Fixed sample size error study across sequence kinds."""

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from configuration import RunConfig
from runner import build_problem
from sequences import Randomization, SequenceKind, SequenceSpec, gen

STUDY_KINDS = (SequenceKind.IID, SequenceKind.LATTICE, SequenceKind.NET)


@dataclass
class ConvergenceRow:
    kind: SequenceKind
    n: int
    median_abs_error: float


@dataclass
class ConvergenceStudy:
    exact: float
    rows: list[ConvergenceRow] = field(default_factory=list)
    slopes: dict[str, float | None] = field(default_factory=dict)

    def errors(self, kind: SequenceKind) -> np.ndarray:
        return np.array([row.median_abs_error for row in self.rows if row.kind is kind])


def study_randomization(kind: SequenceKind, requested: Randomization | None) -> Randomization | None:
    if kind is SequenceKind.IID:
        return None
    if requested is not None and not (kind is SequenceKind.LATTICE and requested is Randomization.SCRAMBLE):
        return requested
    return Randomization.SCRAMBLE if kind is SequenceKind.NET else Randomization.SHIFT


def fit_slope(sizes, errors) -> float | None:
    """Least squares slope of ``log(error)`` against ``log(n)``; ``None`` when an error is exactly 0."""
    errors = np.asarray(errors, dtype=float)
    if not np.all(errors > 0):
        return None
    return float(np.polyfit(np.log(np.asarray(sizes, dtype=float)), np.log(errors), 1)[0])


def convergence_study(config: RunConfig) -> ConvergenceStudy:
    """Median absolute error over randomizations at ``n = 2^study_m_min .. 2^study_m_max``."""
    start = time.time()
    problem, reference = build_problem(config)
    exact = float(reference)
    sizes = [2**m for m in range(config.study_m_min, config.study_m_max + 1)]
    study = ConvergenceStudy(exact=exact)
    for kind in STUDY_KINDS:
        randomization = study_randomization(kind, config.randomization)
        errors = np.empty((config.study_seeds, len(sizes)))
        for s in range(config.study_seeds):
            seed = int(np.random.SeedSequence([config.seed, s]).generate_state(1, dtype=np.uint64)[0])
            spec = SequenceSpec(kind, problem.dimension, seed=seed, randomization=randomization)
            values = np.asarray(problem.integrand(gen(spec, 1, sizes[-1]).values)).reshape(-1)
            errors[s] = [abs(values[:n].mean() - exact) for n in sizes]
        medians = np.median(errors, axis=0)
        study.rows.extend(ConvergenceRow(kind, n, float(e)) for n, e in zip(sizes, medians))
        study.slopes[str(kind)] = fit_slope(sizes, medians)
        slope = study.slopes[str(kind)]
        logging.info(f"Convergence of {kind}: slope {'undefined' if slope is None else f'{slope:.3f}'}")
    logging.info(f"Convergence study finished in {time.time() - start:.2f}s")
    return study
