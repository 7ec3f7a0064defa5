import json
import sys
import unittest

import numpy as np

from driver import IterationRecord, RunReport, RunStatus
from intervals import BoundsArray
from report import QOI_COLUMNS, qoi_rows, report_document, to_csv, to_json


def make_report() -> RunReport:
    record = IterationRecord(
        iteration=1,
        n_start=1,
        n_end=64,
        nodes=64,
        stopped_means=np.zeros(2, dtype=bool),
        active_means=2,
        converged_qoi=1,
        output_evaluations=128,
        model_calls=64,
        max_active_width=np.inf,
    )
    return RunReport(
        s_hat=np.array([0.5, np.nan]),
        s_bounds=BoundsArray(np.array([0.25, -np.inf]), np.array([0.75, np.inf])),
        mu_bounds=BoundsArray(np.array([0.25, -np.inf]), np.array([0.75, np.inf])),
        n_total=64,
        samples=1024,
        eval_counts=np.array([1024, 1024]),
        converged=np.array([True, False]),
        iterations=1,
        status=RunStatus.BUDGET_EXHAUSTED,
        model_calls=64,
        history=[record],
        wall_time=1.5,
    )


class TestReport(unittest.TestCase):
    def test_document(self):
        sys.stderr.write("🚀 Starting test: test_document\n")
        sys.stderr.flush()
        document = report_document(make_report(), reference=np.array([0.5, 0.0]))
        self.assertEqual(document["status"], "budget-exhausted")
        self.assertFalse(document["all_converged"])
        self.assertEqual(document["s_hat"], [0.5, None])
        self.assertEqual(document["s_lo"], [0.25, None])
        self.assertEqual(document["converged"], [True, False])
        self.assertEqual(document["eval_counts"], [1024, 1024])
        self.assertIsNone(document["history"][0]["max_active_width"])
        self.assertEqual(list(document)[-2:], ["reference", "wall_time"])
        # strict JSON: no NaN or Infinity literals
        json.loads(to_json(document), parse_constant=lambda name: self.fail(f"unexpected {name}"))

    def test_rows(self):
        rows = qoi_rows(make_report())
        self.assertEqual(rows, [["0", "0.5", "0.25", "0.75", "true"], ["1", "", "-inf", "inf", "false"]])
        text = to_csv(QOI_COLUMNS, rows)
        self.assertEqual(text.splitlines()[0], "index,s_hat,s_lo,s_hi,converged")
        self.assertEqual(text.splitlines()[2], "1,,-inf,inf,false")

    def test_scalar_qoi_row_is_keyed(self):
        report = make_report()
        report.s_hat = np.array(0.5)
        report.s_bounds = BoundsArray(np.array(0.25), np.array(0.75))
        report.converged = np.array(True)
        self.assertEqual(qoi_rows(report), [["0", "0.5", "0.25", "0.75", "true"]])


if __name__ == "__main__":
    unittest.main()
