"""
ODE integration command.
"""
import logging

from qfp.commands.output import build_report, write_summary, write_table
from qfp.experiments import OdeExperiment
from qfp.models import OdeConfig, RunReport
from qfp.utils.metrics import MetricsCollector

logger = logging.getLogger(__name__)


def cmd_ode(config: OdeConfig, out_dir: str) -> RunReport:
    """Integrate for every (width, dt) pair and write ode.csv and ode_summary.json."""
    metrics = MetricsCollector()
    logger.info(
        f"ODE run: widths {[s.width for s in config.splits]}, dt {config.dts}, "
        f"horizon {config.horizon}, backend {config.backend}"
    )
    table, cases = OdeExperiment(config).run()
    for _ in range(len(table)):
        metrics.record_sample()

    write_table(table, out_dir, "ode")
    report = build_report("ode", config.model_dump(), cases, metrics, seed=config.seed)
    write_summary(report, out_dir, "ode")
    return report
