"""
Actions module for sync actions.
"""

from .sampling_plan import SamplingPlanAction

__all__ = ["SamplingPlanAction"]
