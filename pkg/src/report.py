"""Serialisable views of run reports and convergence studies."""

import csv
import io
import json

import numpy as np

from convergence import ConvergenceStudy
from driver import RunReport

QOI_COLUMNS = ["index", "s_hat", "s_lo", "s_hi", "converged"]
STUDY_COLUMNS = ["kind", "n", "median_abs_error"]


def _plain(values) -> object:
    """Nested lists with non-finite floats as ``None``."""
    array = np.asarray(values)
    if array.dtype == bool or np.issubdtype(array.dtype, np.integer):
        return array.tolist()
    as_float = array.astype(float)
    return np.where(np.isfinite(as_float), as_float, None).tolist() if as_float.ndim else _scalar(as_float)


def _scalar(value) -> float | None:
    value = float(value)
    return value if np.isfinite(value) else None


def report_document(report: RunReport, reference=None) -> dict:
    document = {
        "status": str(report.status),
        "all_converged": report.all_converged,
        "qoi_shape": list(report.s_bounds.shape),
        "mean_shape": list(report.mu_bounds.shape),
        "s_hat": _plain(report.s_hat),
        "s_lo": _plain(report.s_bounds.lo),
        "s_hi": _plain(report.s_bounds.hi),
        "converged": _plain(report.converged),
        "n_total": report.n_total,
        "samples": report.samples,
        "eval_counts": _plain(report.eval_counts),
        "iterations": report.iterations,
        "model_calls": report.model_calls,
        "history": [
            {
                "iteration": record.iteration,
                "n_start": record.n_start,
                "n_end": record.n_end,
                "active_means": record.active_means,
                "converged_qoi": record.converged_qoi,
                "output_evaluations": record.output_evaluations,
                "model_calls": record.model_calls,
                "max_active_width": _scalar(record.max_active_width),
            }
            for record in report.history
        ],
    }
    if reference is not None:
        document["reference"] = _plain(reference)
    document["wall_time"] = report.wall_time
    return document


def qoi_rows(report: RunReport) -> list[list]:
    """One row per QOI index in C order; a scalar QOI is keyed ``0``."""
    rows = []
    for index in np.ndindex(report.s_bounds.shape):
        s_hat = report.s_hat[index]
        rows.append(
            [
                ":".join(str(i) for i in index) or "0",
                "" if np.isnan(s_hat) else repr(float(s_hat)),
                repr(float(report.s_bounds.lo[index])),
                repr(float(report.s_bounds.hi[index])),
                str(bool(report.converged[index])).lower(),
            ]
        )
    return rows


def study_document(study: ConvergenceStudy) -> dict:
    return {
        "exact": study.exact,
        "rows": [{"kind": str(row.kind), "n": row.n, "median_abs_error": row.median_abs_error} for row in study.rows],
        "slopes": study.slopes,
    }


def study_rows(study: ConvergenceStudy) -> list[list]:
    return [[str(row.kind), row.n, repr(row.median_abs_error)] for row in study.rows]


def to_json(document: dict) -> str:
    return json.dumps(document, indent=2) + "\n"


def to_csv(columns: list[str], rows: list[list]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)
    return buffer.getvalue()
