"""Command-line front end.

Exit codes: 0 when every QOI converged, 2 when the sample budget ran out first,
1 on any error.
"""

import argparse
import logging
import os
import sys

from keboola.component.exceptions import UserException

from bounders import BounderKind
from configuration import Command, OutputFormat, RunConfig
from convergence import ConvergenceStudy, convergence_study
from criteria import MetricKind
from driver import RunReport, RunStatus
from exceptions import ReportWriteError, UsageError
from report import QOI_COLUMNS, STUDY_COLUMNS, qoi_rows, report_document, study_document, study_rows, to_csv, to_json
from runner import execute
from sequences import Randomization, SequenceKind

EXIT_CONVERGED = 0
EXIT_ERROR = 1
EXIT_BUDGET_EXHAUSTED = 2

# flag name -> argparse keyword arguments; every flag maps onto the RunConfig field of the same name
OPTIONS = {
    "preset": {},
    "sequence": {"choices": [k.value for k in SequenceKind]},
    "randomization": {"choices": [k.value for k in Randomization]},
    "bounder": {"choices": [k.value for k in BounderKind]},
    "seed": {"type": int},
    "alpha": {"type": float},
    "eps-abs": {"type": float},
    "eps-rel": {"type": float},
    "metric": {"choices": [MetricKind.ABS_OR_REL.value, MetricKind.ABS_AND_REL.value]},
    "m1": {"type": int},
    "max-samples": {"type": int},
    "replications": {"type": int},
    "inflation": {"type": float},
    "workers": {"type": int},
    "output-format": {"choices": [k.value for k in OutputFormat]},
    "output": {},
    "dimension": {"type": int},
    "subsets": {},
    "ishigami-a": {"type": float},
    "ishigami-b": {"type": float},
    "observations": {},
    "y-star": {"type": float},
    "study-seeds": {"type": int},
    "study-m-min": {"type": int},
    "study-m-max": {"type": int},
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"Usage error: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qmcqoi", description="Adaptive (quasi-)Monte Carlo for array quantities of interest")
    parser.add_argument("command", choices=[c.value for c in Command])
    parser.add_argument("--config", help="flat 'key = value' configuration file")
    parser.add_argument("--debug", action="store_true", default=argparse.SUPPRESS)
    for name, kwargs in OPTIONS.items():
        parser.add_argument(f"--{name}", default=argparse.SUPPRESS, **kwargs)
    return parser


def read_config_file(path: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment and keys may use ``-`` or ``_``."""
    values = {}
    try:
        with open(path) as f:
            lines = f.readlines()
    except OSError as e:
        raise UsageError(f"Cannot read config file {path}: {e}")
    for number, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, separator, value = line.partition("=")
        if not separator or not key.strip():
            raise UsageError(f"{path}:{number}: expected 'key = value', got '{raw.strip()}'")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def parse_config(argv=None, config_file: str | None = None) -> RunConfig:
    """Merge the config file (if any) with command-line flags; flags win."""
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    path = args.pop("config", None) or config_file
    values = read_config_file(path) if path else {}
    if "command" in values and values["command"] != command:
        logging.info(f"Command '{command}' from the command line overrides '{values['command']}' from {path}")
    values.update({key.replace("-", "_"): value for key, value in args.items()})
    values["command"] = command
    return RunConfig(**values)


def _write(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w") as f:
            f.write(text)
    except OSError as e:
        raise ReportWriteError(f"Cannot write report to {path}: {e}")
    logging.info(f"Report written to {os.path.abspath(path)}")


def emit_report(report: RunReport, output_format=OutputFormat.JSON, path: str | None = None, reference=None) -> str:
    """Write the report to ``path`` (stdout when ``None``) and return the written text."""
    if OutputFormat(output_format) is OutputFormat.JSON:
        text = to_json(report_document(report, reference))
    else:
        text = to_csv(QOI_COLUMNS, qoi_rows(report))
    _write(text, path)
    return text


def emit_study(study: ConvergenceStudy, output_format=OutputFormat.JSON, path: str | None = None) -> str:
    if OutputFormat(output_format) is OutputFormat.JSON:
        text = to_json(study_document(study))
    else:
        text = to_csv(STUDY_COLUMNS, study_rows(study))
    _write(text, path)
    return text


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        config = parse_config(argv)
        if config.debug:
            logging.getLogger().setLevel(logging.DEBUG)
        if config.command is Command.CONVERGENCE:
            emit_study(convergence_study(config), config.output_format, config.output)
            return EXIT_CONVERGED
        prepared, report = execute(config)
        emit_report(report, config.output_format, config.output, prepared.reference)
        return EXIT_CONVERGED if report.status is RunStatus.CONVERGED else EXIT_BUDGET_EXHAUSTED
    except UserException as exc:
        logging.error(exc)
        return EXIT_ERROR
    except Exception as exc:
        logging.exception(exc)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
