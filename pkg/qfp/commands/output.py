"""
Writing command tables and summaries.
"""
import logging
from pathlib import Path
from typing import Dict, List, Optional

import pandas as pd

from qfp import __version__
from qfp.models import CaseReport, RunReport
from qfp.utils.metrics import MetricsCollector

logger = logging.getLogger(__name__)


def write_table(table: pd.DataFrame, out_dir: str, name: str) -> Path:
    """Write a CSV table without the index column."""
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    target = path / f"{name}.csv"
    table.to_csv(target, index=False)
    logger.info(f"Wrote {len(table)} rows to {target}")
    return target


def build_report(
    command: str,
    config: dict,
    cases: List[CaseReport],
    metrics: MetricsCollector,
    seed: Optional[int] = None,
    extra: Optional[Dict[str, object]] = None,
) -> RunReport:
    for case in cases:
        key = f"w{case.width}" if case.dt is None else f"w{case.width}-dt{case.dt}"
        metrics.record_case(key, case.seconds)
        metrics.record_circuit(case.stats.gate_count)
    return RunReport(
        command=command,
        version=__version__,
        seed=seed,
        config=config,
        cases=cases,
        extra=extra or {},
        metrics=metrics.get_metrics(),
        wall_seconds=round(metrics.elapsed_seconds, 3),
    )


def write_summary(report: RunReport, out_dir: str, name: str) -> Path:
    """Write the summary JSON document."""
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    target = path / f"{name}_summary.json"
    target.write_text(report.model_dump_json(by_alias=True, indent=2) + "\n")
    logger.info(f"Wrote summary to {target}")
    return target
