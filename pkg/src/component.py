import csv
import logging
import time

from keboola.component.base import ComponentBase, sync_action
from keboola.component.dao import BaseType, ColumnDefinition, SupportedDataTypes
from keboola.component.exceptions import UserException

from actions import SamplingPlanAction
from configuration import Command, RunConfig
from convergence import convergence_study
from driver import RunStatus
from report import QOI_COLUMNS, STUDY_COLUMNS, qoi_rows, report_document, study_document, study_rows, to_json
from runner import execute
from validators import ProblemValidator

QOI_TYPES = {
    "index": SupportedDataTypes.STRING,
    "s_hat": SupportedDataTypes.FLOAT,
    "s_lo": SupportedDataTypes.FLOAT,
    "s_hi": SupportedDataTypes.FLOAT,
    "converged": SupportedDataTypes.BOOLEAN,
}
STUDY_TYPES = {
    "kind": SupportedDataTypes.STRING,
    "n": SupportedDataTypes.INTEGER,
    "median_abs_error": SupportedDataTypes.FLOAT,
}


class Component(ComponentBase):
    def __init__(self):
        super().__init__()
        self.params = RunConfig(**self.configuration.parameters)

    def run(self):
        start_time = time.time()
        if self.params.command is Command.CONVERGENCE:
            study = convergence_study(self.params)
            self._export_table("convergence.csv", STUDY_COLUMNS, STUDY_TYPES, study_rows(study), ["kind", "n"])
            self._export_file("report.json", to_json(study_document(study)))
        else:
            prepared, report = execute(self.params)
            self._export_table("qoi.csv", QOI_COLUMNS, QOI_TYPES, qoi_rows(report), ["index"])
            self._export_file("report.json", to_json(report_document(report, prepared.reference)))
            if report.status is RunStatus.BUDGET_EXHAUSTED:
                logging.warning(
                    f"Sample budget exhausted: {int(report.converged.sum())}/{report.converged.size} QOI converged"
                )
        logging.info(f"Total component execution time: {time.time() - start_time:.2f}s")

    def _export_table(self, name: str, columns: list[str], types: dict, rows: list[list], primary_key: list[str]):
        schema = {column: ColumnDefinition(data_types=BaseType(dtype=types[column])) for column in columns}
        out_table = self.create_out_table_definition(name=name, schema=schema, primary_key=primary_key, has_header=True)
        try:
            with open(out_table.full_path, "w", newline="") as f:
                writer = csv.writer(f)
                writer.writerow(columns)
                writer.writerows(rows)
        except OSError as e:
            raise UserException(f"Error exporting table {name}: {e}")
        self.write_manifest(out_table)

    def _export_file(self, name: str, text: str):
        out_file = self.create_out_file_definition(name=name, tags=["qmcqoi", str(self.params.command)])
        try:
            with open(out_file.full_path, "w") as f:
                f.write(text)
        except OSError as e:
            raise UserException(f"Error exporting file {name}: {e}")
        self.write_manifest(out_file)

    @sync_action("validate_problem")
    def validate_problem(self):
        """
        Validate the dependency structure and error metrics of the configured problem.
        Returns ValidationResult with the findings.
        """
        return ProblemValidator().validate_problem(self.params)

    @sync_action("sampling_plan")
    def sampling_plan(self):
        """
        Describe mean ownership, the uncertainty allocation and the planned node blocks.
        Returns ValidationResult with a markdown plan.
        """
        return SamplingPlanAction().sampling_plan(self.params)


"""
        Main entrypoint
"""
if __name__ == "__main__":
    try:
        comp = Component()
        # this triggers the run method by default and is controlled by the configuration.action parameter
        comp.execute_action()
    except UserException as exc:
        logging.exception(exc)
        exit(1)
    except Exception as exc:
        logging.exception(exc)
        exit(2)
