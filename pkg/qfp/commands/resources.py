"""
Resource survey command.
"""
import logging
from pathlib import Path

from qfp.commands.output import build_report, write_summary, write_table
from qfp.experiments import ResourceSurvey
from qfp.models import ResourceConfig, RunReport
from qfp.utils.metrics import MetricsCollector

logger = logging.getLogger(__name__)


def cmd_resources(config: ResourceConfig, out_dir: str) -> RunReport:
    """
    Write resources_<op>.csv with one row per (width, kind, arity).

    The summary carries R^2 values of linear fits of the 1-, 2- and 3-qubit
    totals and of a quadratic fit of the controlled-phase count. With
    config.dump set, the circuit of the largest width is dumped there.
    """
    metrics = MetricsCollector()
    survey = ResourceSurvey(config)
    table, cases, fits = survey.run()

    name = f"resources_{config.op}"
    write_table(table, out_dir, name)
    if config.dump and survey.largest is not None:
        Path(config.dump).write_text(survey.largest.dump() + "\n")
        logger.info(f"Dumped {survey.largest.name} to {config.dump}")

    report = build_report("resources", config.model_dump(), cases, metrics, extra={"fits": fits})
    write_summary(report, out_dir, name)
    return report
