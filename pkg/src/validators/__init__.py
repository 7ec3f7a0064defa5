"""Validators for configured problems."""

from .problem_validator import ProblemValidator

__all__ = ["ProblemValidator"]
