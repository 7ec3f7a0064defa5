import sys
import unittest

import numpy as np

from criteria import (
    ErrorMetric,
    MetricKind,
    check_metric_map,
    h_eval,
    optimal_estimate,
    optimal_estimates,
    stopping_met,
)
from exceptions import InvalidArgumentError, MetricEvaluationError, NoEstimateError


class TestMetrics(unittest.TestCase):
    def test_h_eval(self):
        sys.stderr.write("🚀 Starting test: test_h_eval\n")
        sys.stderr.flush()
        either = ErrorMetric(MetricKind.ABS_OR_REL, eps_abs=0.01, eps_rel=0.1)
        both = ErrorMetric(MetricKind.ABS_AND_REL, eps_abs=0.01, eps_rel=0.1)
        self.assertAlmostEqual(h_eval(either, 1.0), 0.1)
        self.assertAlmostEqual(h_eval(both, 1.0), 0.01)
        self.assertEqual(h_eval(either, 0.0), 0.01)
        self.assertEqual(h_eval(both, 0.0), 0.0)
        np.testing.assert_allclose(either(np.array([-2.0, 0.05])), [0.2, 0.01])

    def test_h_eval_with_metric_array(self):
        metrics = np.array([ErrorMetric.absolute(0.1), ErrorMetric(eps_rel=0.5)], dtype=object)
        np.testing.assert_allclose(h_eval(metrics, np.array([3.0, 3.0])), [0.1, 1.5])

    def test_metric_map_check(self):
        self.assertTrue(check_metric_map(ErrorMetric(eps_abs=0.01, eps_rel=0.1)))
        for eps_rel in np.linspace(0, 0.99, 12):
            self.assertTrue(check_metric_map(ErrorMetric(MetricKind.ABS_AND_REL, eps_abs=0.5, eps_rel=eps_rel)))
        self.assertTrue(check_metric_map(ErrorMetric(MetricKind.CUSTOM, function=lambda s: np.full_like(s, 0.3))))

    def test_custom_metric_must_be_metric_map(self):
        with self.assertRaises(InvalidArgumentError):
            ErrorMetric(MetricKind.CUSTOM, function=lambda s: 2 * np.abs(s))
        with self.assertRaises(MetricEvaluationError):
            ErrorMetric(MetricKind.CUSTOM, function=lambda s: np.where(s > 0, np.inf, 1.0))

    def test_invalid_tolerances(self):
        with self.assertRaises(InvalidArgumentError):
            ErrorMetric(eps_abs=0.01, eps_rel=1.5)
        with self.assertRaises(InvalidArgumentError):
            ErrorMetric(eps_abs=-1)
        with self.assertRaises(InvalidArgumentError):
            ErrorMetric(eps_abs=0, eps_rel=0)


class TestStoppingAndEstimate(unittest.TestCase):
    def test_examples(self):
        sys.stderr.write("🚀 Starting test: test_examples\n")
        sys.stderr.flush()
        relative = ErrorMetric(eps_rel=0.4)
        self.assertTrue(stopping_met(1.0, 2.0, relative))
        constant = ErrorMetric.absolute(0.1)
        self.assertTrue(stopping_met(0.0, 0.2, constant))
        self.assertFalse(stopping_met(0.0, 0.2000001, constant))
        self.assertTrue(stopping_met(5.0, 5.0, constant))
        self.assertFalse(stopping_met(-np.inf, 1.0, constant))
        np.testing.assert_array_equal(stopping_met([0.0, 0.0], [0.1, 1.0], constant), [True, False])

    def test_optimal_estimate(self):
        self.assertAlmostEqual(optimal_estimate(1.0, 3.0, ErrorMetric.absolute(0.5)), 2.0)
        self.assertAlmostEqual(optimal_estimate(1.0, 2.0, ErrorMetric(eps_rel=0.1)), 1.45)
        self.assertEqual(optimal_estimate(0.7, 0.7, ErrorMetric(eps_rel=0.1)), 0.7)
        with self.assertRaises(NoEstimateError):
            optimal_estimate(0.0, np.inf, ErrorMetric.absolute(0.1))
        estimates = optimal_estimates(np.array([1.0, -np.inf]), np.array([3.0, 1.0]), ErrorMetric.absolute(0.1))
        self.assertEqual(estimates[0], 2.0)
        self.assertTrue(np.isnan(estimates[1]))

    def test_equivalence_and_minimax(self):
        sys.stderr.write("🚀 Starting test: test_equivalence_and_minimax\n")
        sys.stderr.flush()
        rng = np.random.default_rng(1)
        for _ in range(1000):
            centre, half = rng.normal(scale=2), rng.exponential(0.3)
            s_lo, s_hi = centre - half, centre + half
            kind = MetricKind.ABS_OR_REL if rng.random() < 0.5 else MetricKind.ABS_AND_REL
            metric = ErrorMetric(kind, eps_abs=rng.uniform(0.01, 0.5), eps_rel=rng.uniform(0.01, 0.99))
            s_hat = optimal_estimate(s_lo, s_hi, metric)
            self.assertTrue(s_lo - 1e-12 <= s_hat <= s_hi + 1e-12)

            grid = np.linspace(s_lo, s_hi, 10**4)
            h = h_eval(metric, grid)
            worst = np.max(np.abs(grid - s_hat) - h)
            self.assertEqual(stopping_met(s_lo, s_hi, metric), bool(worst <= 1e-10))

            candidates = np.linspace(s_lo, s_hi, 10**3)
            coarse = grid[::101]
            coarse_h = h[::101]
            worst_by_candidate = np.max(np.abs(coarse[None, :] - candidates[:, None]) - coarse_h[None, :], axis=1)
            resolution = 1e-3 * (s_hi - s_lo)
            self.assertGreaterEqual(worst_by_candidate.min(), worst - resolution)


if __name__ == "__main__":
    unittest.main()
