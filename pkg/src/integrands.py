"""Integrand protocol shared by the driver and the problem builders."""

import threading
from abc import ABC, abstractmethod
from collections.abc import Callable

import numpy as np


class Integrand(ABC):
    """Array-valued integrand on ``(0, 1)^dimension``.

    ``evaluate(x, compute)`` receives nodes shaped ``(n, dimension)`` and a
    boolean array shaped ``mean_shape`` marking the outputs that are required;
    entries outside ``compute`` may hold anything and are discarded.
    """

    def __init__(self, dimension: int, mean_shape=()):
        self.dimension = int(dimension)
        self.mean_shape = tuple(int(k) for k in mean_shape)
        self.model_calls = 0
        self._lock = threading.Lock()

    @abstractmethod
    def evaluate(self, x: np.ndarray, compute: np.ndarray) -> np.ndarray:
        pass

    def model_calls_per_node(self, compute: np.ndarray) -> int:
        """Underlying model invocations needed per node for the given mask."""
        return int(np.any(compute))

    def count_calls(self, calls: int) -> None:
        with self._lock:
            self.model_calls += int(calls)

    def __call__(self, x, compute=None) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        compute = np.ones(self.mean_shape, dtype=bool) if compute is None else np.asarray(compute, dtype=bool)
        return self.evaluate(x, compute)


class FunctionIntegrand(Integrand):
    """Wraps a vectorised callable ``f(x)`` (or ``f(x, compute)`` when ``accepts_mask``)."""

    def __init__(self, function: Callable, dimension: int, mean_shape=(), accepts_mask: bool = False):
        super().__init__(dimension, mean_shape)
        self.function = function
        self.accepts_mask = accepts_mask

    def evaluate(self, x: np.ndarray, compute: np.ndarray) -> np.ndarray:
        values = self.function(x, compute) if self.accepts_mask else self.function(x)
        self.count_calls(len(x))
        return np.asarray(values, dtype=float)
