"""Masked integrand evaluation fanned out over a thread pool.

Nodes are split into contiguous chunks, evaluated concurrently and
reassembled in node order, so the assembled block (and every reduction over
it) does not depend on the number of workers.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass

import numpy as np

from exceptions import IntegrandEvaluationError, ShapeError
from integrands import Integrand

MIN_CHUNK_NODES = 64


@dataclass
class Evaluation:
    """Evaluations of one node block; entries of stopped means are NaN."""

    values: np.ndarray
    output_evaluations: int
    model_calls: int
    elapsed: float = 0.0


@dataclass
class Chunk:
    start: int
    stop: int
    first_index: int
    block_nodes: int | None = None

    def _locate(self, row: int) -> tuple[int, int]:
        if self.block_nodes is None:
            return 0, self.first_index + row
        replicate, offset = divmod(row, self.block_nodes)
        return replicate + 1, self.first_index + offset

    @property
    def label(self) -> str:
        """Node indices of the chunk, per replicate when rows stack several randomized copies."""
        (first_copy, first), (last_copy, last) = self._locate(self.start), self._locate(self.stop - 1)
        if first_copy == 0:
            return f"nodes {first}-{last}"
        if first_copy == last_copy:
            return f"replicate {first_copy} nodes {first}-{last}"
        return f"replicate {first_copy} node {first} to replicate {last_copy} node {last}"


class EvaluationPool:
    """Evaluates an integrand only where the stopping mask is False."""

    def __init__(self, integrand: Integrand, max_workers: int = 1):
        self.integrand = integrand
        self.max_workers = max(1, int(max_workers))
        self.logger = logging.getLogger(self.__class__.__name__)

    def evaluate(
        self, points: np.ndarray, stopped: np.ndarray, first_index: int = 1, block_nodes: int | None = None
    ) -> Evaluation:
        """Evaluate ``points`` with outputs masked by ``stopped``.

        ``block_nodes`` is the node count of one randomized copy when ``points``
        stacks several copies of the same index range; it only affects error labels.
        """
        stopped = np.asarray(stopped, dtype=bool)
        shape = self.integrand.mean_shape
        if stopped.shape != shape:
            raise ShapeError(f"Stopping mask shape {stopped.shape} does not match mean shape {shape}")
        n = len(points)
        values = np.full((n, *shape), np.nan)
        compute = ~stopped
        if n == 0 or not compute.any():
            return Evaluation(values=values, output_evaluations=0, model_calls=0)

        start = time.time()
        calls_before = self.integrand.model_calls
        chunks = self._chunks(n, first_index, block_nodes)
        if len(chunks) == 1:
            results = {0: self._evaluate_chunk(points, compute, chunks[0])}
        else:
            results = self._evaluate_parallel(points, compute, chunks)
        for position, chunk in enumerate(chunks):
            values[chunk.start : chunk.stop] = results[position]
        values = np.where(stopped, np.nan, values)
        evaluation = Evaluation(
            values=values,
            output_evaluations=n * int(compute.sum()),
            model_calls=self.integrand.model_calls - calls_before,
            elapsed=time.time() - start,
        )
        self.logger.debug(
            f"Evaluated {n} nodes x {int(compute.sum())} outputs in {len(chunks)} chunk(s), "
            f"{evaluation.elapsed:.3f}s"
        )
        return evaluation

    def _chunks(self, n: int, first_index: int, block_nodes: int | None = None) -> list[Chunk]:
        count = max(1, min(self.max_workers, n // MIN_CHUNK_NODES))
        edges = np.linspace(0, n, count + 1).astype(int)
        return [Chunk(int(a), int(b), first_index, block_nodes) for a, b in zip(edges[:-1], edges[1:])]

    def _evaluate_chunk(self, points: np.ndarray, compute: np.ndarray, chunk: Chunk) -> np.ndarray:
        rows = chunk.stop - chunk.start
        try:
            result = self.integrand.evaluate(points[chunk.start : chunk.stop], compute)
        except (ShapeError, IntegrandEvaluationError):
            raise
        except Exception as e:
            raise IntegrandEvaluationError(f"Integrand failed on {chunk.label}: {e}", index=chunk.label) from e
        result = np.asarray(result, dtype=float)
        expected = (rows, *self.integrand.mean_shape)
        if result.shape != expected:
            if result.size == rows * int(np.prod(expected[1:], dtype=int)) and result.shape == (rows,):
                return result.reshape(expected)
            raise ShapeError(f"Integrand returned shape {result.shape} on {chunk.label}, expected {expected}")
        return result

    def _evaluate_parallel(self, points: np.ndarray, compute: np.ndarray, chunks: list[Chunk]) -> dict:
        workers = min(self.max_workers, len(chunks))
        results = {}
        failures = []
        with ThreadPoolExecutor(max_workers=workers) as executor:
            future_to_position = {
                executor.submit(self._evaluate_chunk, points, compute, chunk): position
                for position, chunk in enumerate(chunks)
            }
            for future in as_completed(future_to_position):
                position = future_to_position[future]
                try:
                    results[position] = future.result()
                except Exception as e:
                    failures.append((position, e))
            if failures:
                for future in future_to_position:
                    future.cancel()
        if failures:
            failures.sort(key=lambda item: item[0])
            shape_errors = [e for _, e in failures if isinstance(e, ShapeError)]
            if shape_errors:
                raise shape_errors[0]
            separator = "\n  - "
            raise IntegrandEvaluationError(
                f"Integrand evaluation failed on {len(failures)} of {len(chunks)} chunks:"
                f"{separator}{separator.join(str(e) for _, e in failures)}",
                index=chunks[failures[0][0]].label,
            )
        return results
