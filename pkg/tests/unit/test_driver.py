import sys
import unittest

import numpy as np

from bounders import BounderConfig, BounderKind
from criteria import ErrorMetric
from driver import (
    ProblemSpec,
    RunStatus,
    allocate_alpha,
    evaluate_masked,
    identity_dependency,
    nest_bounds,
    planned_ranges,
    run,
    validate_dependency,
)
from exceptions import DependencyStructureError, IntegrandEvaluationError, InvalidArgumentError, ShapeError
from integrands import FunctionIntegrand
from intervals import BoundsArray, iv_add
from problems import make_mean_vector_problem
from sequences import SequenceKind, SequenceSpec, gen


def pairwise(flags):
    """D(b1, b2) = (b1, b1, b2, b2)."""
    return np.repeat(np.asarray(flags, dtype=bool), 2)


def pair_sums(lo, hi):
    return iv_add(BoundsArray(lo[0::2], hi[0::2]), BoundsArray(lo[1::2], hi[1::2]))


def two_group_problem(eps_second: float) -> ProblemSpec:
    """QOI 1 = mu1 + mu2 (constants), QOI 2 = mu3 + mu4 (x and x^2)."""

    def f(x):
        t = x[:, 0]
        return np.stack([np.full_like(t, 0.25), np.full_like(t, 0.5), t, t**2], axis=1)

    metrics = np.array([ErrorMetric.absolute(0.01), ErrorMetric.absolute(eps_second)], dtype=object)
    return ProblemSpec(
        integrand=FunctionIntegrand(f, 1, (4,)),
        qoi_shape=(2,),
        bound_lo=lambda lo, hi: pair_sums(lo, hi).lo,
        bound_hi=lambda lo, hi: pair_sums(lo, hi).hi,
        dependency=pairwise,
        alpha=0.05,
        metrics=metrics,
    )


class TestDependency(unittest.TestCase):
    def test_identity(self):
        sys.stderr.write("🚀 Starting test: test_identity\n")
        sys.stderr.flush()
        np.testing.assert_array_equal(validate_dependency(identity_dependency, (3,), (3,)), np.eye(3, dtype=bool))

    def test_pairwise_ownership(self):
        matrix = validate_dependency(pairwise, (2,), (4,))
        np.testing.assert_array_equal(matrix, [[1, 1, 0, 0], [0, 0, 1, 1]])

    def test_shared_mean_is_rejected(self):
        def shared(flags):
            flags = np.asarray(flags, dtype=bool)
            return np.array([flags[0], flags[0] | flags[1], flags[1]])

        with self.assertRaises(DependencyStructureError) as ctx:
            validate_dependency(shared, (2,), (3,))
        self.assertIn("mu_4", str(ctx.exception))

    def test_unowned_mean_and_wrong_shape(self):
        with self.assertRaises(DependencyStructureError):
            validate_dependency(lambda b: np.array([b[0], False]), (1,), (2,))
        with self.assertRaises(DependencyStructureError):
            validate_dependency(lambda b: np.asarray(b), (2,), (3,))

    def test_non_monotone_dependency(self):
        def partial(flags):
            flags = np.asarray(flags, dtype=bool)
            if flags.all() or flags.sum() <= 1:
                return flags
            return np.zeros_like(flags)

        with self.assertRaises(DependencyStructureError):
            validate_dependency(partial, (6,), (6,))

    def test_allocate_alpha(self):
        matrix = validate_dependency(pairwise, (2,), (4,))
        np.testing.assert_allclose(allocate_alpha(matrix, [0.05, 0.1]), [0.025, 0.025, 0.05, 0.05])
        scalar = validate_dependency(lambda b: np.repeat(np.asarray(b)[None], 5), (), (5,))
        np.testing.assert_allclose(allocate_alpha(scalar, 0.05), np.full(5, 0.01))
        np.testing.assert_allclose(allocate_alpha(np.eye(3, dtype=bool), [0.1, 0.2, 0.3]), [0.1, 0.2, 0.3])


class TestEvaluateMasked(unittest.TestCase):
    def test_masked_outputs_cost_nothing(self):
        integrand = FunctionIntegrand(lambda x: np.stack([x[:, 0], x[:, 0]], axis=1), 1, (2,))
        block = gen(SequenceSpec(SequenceKind.NET, 1), 1, 16)
        result = evaluate_masked(integrand, block, np.array([True, False]), workers=2)
        self.assertTrue(np.isnan(result.values[:, 0]).all())
        self.assertEqual(result.output_evaluations, 16)


class TestRun(unittest.TestCase):
    def test_constant_integrand_converges_immediately(self):
        sys.stderr.write("🚀 Starting test: test_constant_integrand_converges_immediately\n")
        sys.stderr.flush()
        problem = make_mean_vector_problem(lambda x: np.full(len(x), 3.0), (), ErrorMetric.absolute(1e-6), 0.05, 2)
        report = run(problem, SequenceSpec(SequenceKind.LATTICE, 2), BounderConfig(), m1=6, max_samples=2**10)
        self.assertEqual(report.status, RunStatus.CONVERGED)
        self.assertEqual(report.iterations, 1)
        self.assertEqual(float(report.s_hat), 3.0)
        self.assertEqual(float(report.s_bounds.width), 0.0)
        self.assertEqual(report.n_total, 64)
        self.assertEqual(report.samples, 64 * 16)

    def test_uniform_mean(self):
        problem = make_mean_vector_problem(lambda x: x[:, 0], (), ErrorMetric.absolute(1e-3), 0.05, 1)
        report = run(problem, SequenceSpec(SequenceKind.LATTICE, 1, seed=3), BounderConfig(), m1=8)
        self.assertTrue(report.all_converged)
        self.assertLessEqual(abs(float(report.s_hat) - 0.5), 1e-3)

    def test_iid_clt_run_uses_doubling_rule(self):
        problem = make_mean_vector_problem(lambda x: x[:, 0], (), ErrorMetric.absolute(1e-4), 0.05, 1)
        report = run(problem, SequenceSpec(SequenceKind.IID, 1), BounderConfig(BounderKind.CLT), m1=4, max_samples=200)
        self.assertEqual(report.status, RunStatus.BUDGET_EXHAUSTED)
        self.assertEqual([(r.n_start, r.n_end) for r in report.history], [(1, 16), (17, 34), (35, 70), (71, 142)])
        self.assertEqual(report.n_total, 142)
        self.assertEqual(int(report.eval_counts), 142)
        self.assertTrue(report.history[0].max_active_width > report.history[-1].max_active_width)

    def test_planned_ranges(self):
        self.assertEqual(planned_ranges(2, 32, True), [(1, 4), (5, 8), (9, 16), (17, 32)])
        self.assertEqual(planned_ranges(2, 32, False), [(1, 4), (5, 10), (11, 22)])

    def test_economic_evaluation_freezes_converged_group(self):
        sys.stderr.write("🚀 Starting test: test_economic_evaluation_freezes_converged_group\n")
        sys.stderr.flush()
        problem = two_group_problem(1e-7)
        seq = SequenceSpec(SequenceKind.IID, 1, seed=2)
        report = run(problem, seq, BounderConfig(BounderKind.CLT), m1=6, max_samples=2**9)
        self.assertEqual(report.status, RunStatus.BUDGET_EXHAUSTED)
        np.testing.assert_array_equal(report.converged, [True, False])
        np.testing.assert_array_equal(report.eval_counts[:2], [64, 64])
        np.testing.assert_array_equal(report.eval_counts[2:], [report.n_total, report.n_total])
        self.assertGreater(report.n_total, 64)
        self.assertAlmostEqual(float(report.s_hat[0]), 0.75)
        for record in report.history[1:]:
            np.testing.assert_array_equal(record.stopped_means, [True, True, False, False])
            self.assertEqual(record.output_evaluations, 2 * record.nodes)
        # stopped means keep the bounds of the iteration that stopped them
        self.assertAlmostEqual(float(report.mu_bounds.lo[0]), 0.25)

    def test_worker_count_does_not_change_the_report(self):
        problem = two_group_problem(1e-3)
        reports = [
            run(problem, SequenceSpec(SequenceKind.NET, 1, seed=4), BounderConfig(replications=8), m1=8, workers=w)
            for w in (1, 4, 8)
        ]
        for report in reports[1:]:
            np.testing.assert_array_equal(report.s_hat, reports[0].s_hat)
            self.assertEqual(report.s_bounds, reports[0].s_bounds)
            self.assertEqual(report.mu_bounds, reports[0].mu_bounds)
            np.testing.assert_array_equal(report.eval_counts, reports[0].eval_counts)
            self.assertEqual(report.n_total, reports[0].n_total)

    def test_invalid_runs(self):
        problem = make_mean_vector_problem(lambda x: x[:, 0], (), ErrorMetric.absolute(1e-3), 0.05, 1)
        with self.assertRaises(InvalidArgumentError):
            run(problem, SequenceSpec(SequenceKind.LATTICE, 1), BounderConfig(BounderKind.CLT))
        with self.assertRaises(InvalidArgumentError):
            run(problem, SequenceSpec(SequenceKind.IID, 1), BounderConfig(BounderKind.REPLICATIONS))
        with self.assertRaises(InvalidArgumentError):
            run(problem, SequenceSpec(SequenceKind.LATTICE, 1), BounderConfig(), m1=12, max_samples=2**10)
        with self.assertRaises(ShapeError):
            run(problem, SequenceSpec(SequenceKind.LATTICE, 2), BounderConfig())
        with self.assertRaises(InvalidArgumentError):
            run(problem, SequenceSpec(SequenceKind.NET, 1, randomization="none"), BounderConfig())

    def test_integrand_errors_abort_the_run(self):
        def broken(x):
            raise RuntimeError("model diverged")

        for f in (broken, lambda x: np.where(x[:, 0] < 0.5, np.inf, x[:, 0])):
            problem = make_mean_vector_problem(f, (), ErrorMetric.absolute(1e-3), 0.05, 1)
            with self.assertRaises(IntegrandEvaluationError):
                run(problem, SequenceSpec(SequenceKind.LATTICE, 1), BounderConfig(), m1=4)

    def test_replicated_error_labels_stay_within_the_block(self):
        def broken(x):
            raise RuntimeError("model diverged")

        problem = make_mean_vector_problem(broken, (), ErrorMetric.absolute(1e-3), 0.05, 1)
        with self.assertRaises(IntegrandEvaluationError) as ctx:
            run(problem, SequenceSpec(SequenceKind.LATTICE, 1), BounderConfig(), m1=6, workers=1)
        self.assertEqual(ctx.exception.index, "replicate 1 node 1 to replicate 16 node 64")


class TestReplicatedWidths(unittest.TestCase):
    def test_nest_bounds(self):
        previous = (np.array([0.0, 0.0, -np.inf]), np.array([1.0, 1.0, np.inf]))
        lo, hi = nest_bounds(*previous, [0.5, 2.0, 3.0], [1.5, 4.0, 5.0])
        np.testing.assert_array_equal(lo, [0.5, 2.5, 3.0])
        np.testing.assert_array_equal(hi, [1.0, 3.5, 5.0])

    def test_widths_never_grow(self):
        sys.stderr.write("🚀 Starting test: test_widths_never_grow\n")
        sys.stderr.flush()
        problem = make_mean_vector_problem(lambda x: np.exp(x[:, 0]) * x[:, 1], (), ErrorMetric.absolute(1e-9), 0.05, 2)
        for seed in range(40):
            report = run(
                problem, SequenceSpec(SequenceKind.LATTICE, 2, seed=seed), BounderConfig(), m1=6, max_samples=2**12
            )
            widths = [record.max_active_width for record in report.history]
            self.assertEqual(len(widths), 7)
            for previous, current in zip(widths[:-1], widths[1:]):
                self.assertLessEqual(current, previous + 1e-12, f"seed {seed}: {widths}")


class TestCoverage(unittest.TestCase):
    TRIALS = 200
    ALPHA = 0.05

    def coverage(self, kind: SequenceKind, bounder: BounderConfig) -> int:
        problem = make_mean_vector_problem(lambda x: x[:, 0] ** 2, (), ErrorMetric.absolute(2e-3), self.ALPHA, 1)
        hits = 0
        for seed in range(self.TRIALS):
            report = run(problem, SequenceSpec(kind, 1, seed=seed), bounder, m1=10)
            self.assertTrue(report.all_converged)
            hits += bool(report.s_bounds.contains(1 / 3))
        return hits

    def test_iid_clt_coverage(self):
        sys.stderr.write("🚀 Starting test: test_iid_clt_coverage\n")
        sys.stderr.flush()
        hits = self.coverage(SequenceKind.IID, BounderConfig(BounderKind.CLT))
        self.assertGreaterEqual(hits, (1 - self.ALPHA - 0.03) * self.TRIALS)

    def test_replicated_lattice_coverage(self):
        sys.stderr.write("🚀 Starting test: test_replicated_lattice_coverage\n")
        sys.stderr.flush()
        hits = self.coverage(SequenceKind.LATTICE, BounderConfig())
        self.assertGreaterEqual(hits, (1 - self.ALPHA - 0.03) * self.TRIALS)


if __name__ == "__main__":
    unittest.main()
