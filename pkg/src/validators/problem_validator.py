"""Checks a configured problem before any sampling happens."""

import logging

import numpy as np
from keboola.component.exceptions import UserException
from keboola.component.sync_actions import MessageType, ValidationResult

from criteria import ErrorMetric, check_metric_map
from driver import allocate_alpha, validate_dependency
from runner import prepare

MAX_LISTED_ERRORS = 10


class ProblemValidator:
    """Dependency structure and error metric validation."""

    def __init__(self):
        self.logger = logging.getLogger(self.__class__.__name__)

    def validate_problem(self, config) -> ValidationResult:
        errors = []
        try:
            prepared = prepare(config)
        except UserException as e:
            return ValidationResult(message=f"❌ Problem could not be built: {e}", type=MessageType.DANGER)
        problem = prepared.problem
        try:
            matrix = validate_dependency(problem.dependency, problem.qoi_shape, problem.mean_shape)
            allocate_alpha(matrix, problem.alpha, problem.mean_shape)
        except UserException as e:
            errors.append(f"Dependency function: {e}")
        metrics = [problem.metrics] if isinstance(problem.metrics, ErrorMetric) else list(problem.metrics.flat)
        for metric in {id(m): m for m in metrics}.values():
            try:
                if not check_metric_map(metric, metric.check_domain, metric.check_grid):
                    errors.append(f"Error metric {metric.kind} is not a metric map on {metric.check_domain}")
            except UserException as e:
                errors.append(f"Error metric {metric.kind}: {e}")

        if errors:
            message = f"❌ Found {len(errors)} problem(s) in '{problem.name}':\n"
            message += "\n".join(f"• {error}" for error in errors[:MAX_LISTED_ERRORS])
            if len(errors) > MAX_LISTED_ERRORS:
                message += f"\n... and {len(errors) - MAX_LISTED_ERRORS} more"
            self.logger.info(f"Problem validation failed with {len(errors)} error(s)")
            return ValidationResult(message=message, type=MessageType.DANGER)
        message = (
            f"✅ Problem '{problem.name}' is valid: {int(np.prod(problem.qoi_shape, dtype=int))} QOI, "
            f"{int(np.prod(problem.mean_shape, dtype=int))} means, node dimension {problem.dimension}."
        )
        return ValidationResult(message=message, type=MessageType.SUCCESS)
