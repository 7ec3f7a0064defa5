"""
Sampling plan action describing how a run would spend its budget.
"""

import logging

import numpy as np
from keboola.component.sync_actions import MessageType, ValidationResult

from bounders import BounderKind
from driver import allocate_alpha, planned_ranges, validate_dependency
from runner import PreparedRun, prepare


class SamplingPlanAction:
    """Handles the sampling plan sync action."""

    def __init__(self):
        self.logger = logging.getLogger(self.__class__.__name__)

    def sampling_plan(self, config) -> ValidationResult:
        try:
            prepared = prepare(config)
            return ValidationResult(message=self._plan_markdown(prepared, config), type=MessageType.SUCCESS)
        except Exception as e:
            return ValidationResult(message=f"Error generating sampling plan: {str(e)}", type=MessageType.DANGER)

    @staticmethod
    def _plan_markdown(prepared: PreparedRun, config) -> str:
        problem = prepared.problem
        matrix = validate_dependency(problem.dependency, problem.qoi_shape, problem.mean_shape)
        alpha_mu = allocate_alpha(matrix, problem.alpha, problem.mean_shape)
        sequences = 1 if prepared.bounder.kind is BounderKind.CLT else prepared.bounder.replications
        per_node = problem.integrand.model_calls_per_node(np.ones(problem.mean_shape, dtype=bool))

        markdown = f"# 🧮 Sampling Plan: {problem.name}\n\n"
        markdown += "## 📊 Summary\n\n"
        markdown += f"- **QOI shape:** {problem.qoi_shape}\n"
        markdown += f"- **Mean shape:** {problem.mean_shape}\n"
        markdown += f"- **Sequence:** {prepared.sequence.kind} (seed {prepared.sequence.seed})\n"
        markdown += f"- **Bounder:** {prepared.bounder.kind}, inflation {prepared.bounder.inflation}\n"
        markdown += f"- **Independent sequences:** {sequences}\n"
        markdown += f"- **Model calls per fully evaluated node:** {per_node}\n\n"

        markdown += "## 🔗 Mean Ownership\n\n"
        for position, index in enumerate(np.ndindex(problem.qoi_shape)):
            owned = int(matrix[position].sum())
            markdown += f"- QOI {index}: {owned} mean(s), alpha {float(problem.alpha[index]):.4g} "
            markdown += f"→ {float(problem.alpha[index]) / owned:.4g} per mean\n"
        markdown += f"\nSmallest mean uncertainty level: {float(np.min(alpha_mu)):.4g}\n\n"

        markdown += "## 🔄 Planned Iterations\n\n"
        markdown += "| Iteration | Nodes | Cumulative nodes | Cumulative samples |\n|---|---|---|---|\n"
        for iteration, (n_start, n_end) in enumerate(
            planned_ranges(config.m1, config.max_samples, prepared.sequence.kind.is_low_discrepancy), start=1
        ):
            markdown += f"| {iteration} | {n_start}-{n_end} | {n_end} | {n_end * sequences} |\n"
        return markdown
