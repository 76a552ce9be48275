"""
Run metrics for experiment commands.
"""
import time
from typing import Dict


class MetricsCollector:
    """Counters collected while a command runs; snapshotted into the summary."""

    def __init__(self):
        """Initialize metrics collector."""
        self.start_time = time.time()
        self.circuits_built = 0
        self.gates_emitted = 0
        self.samples_evaluated = 0
        self.samples_discarded = 0
        self.cases_completed = 0
        self.case_seconds: Dict[str, float] = {}

    def record_circuit(self, gate_count: int) -> None:
        """Record a built circuit and its gate count."""
        self.circuits_built += 1
        self.gates_emitted += gate_count

    def record_sample(self, discarded: bool = False) -> None:
        """Record one evaluated sample."""
        self.samples_evaluated += 1
        if discarded:
            self.samples_discarded += 1

    def record_case(self, key: str, seconds: float) -> None:
        """Record a finished (width, ...) case and its wall time."""
        self.cases_completed += 1
        self.case_seconds[key] = seconds

    @property
    def discard_rate(self) -> float:
        """Fraction of evaluated samples that were discarded."""
        if self.samples_evaluated == 0:
            return 0.0
        return self.samples_discarded / self.samples_evaluated

    @property
    def elapsed_seconds(self) -> float:
        """Seconds since the collector was created."""
        return time.time() - self.start_time

    def get_metrics(self) -> dict:
        """Get all metrics as a dictionary."""
        return {
            "circuitsBuilt": self.circuits_built,
            "gatesEmitted": self.gates_emitted,
            "samplesEvaluated": self.samples_evaluated,
            "samplesDiscarded": self.samples_discarded,
            "discardRate": round(self.discard_rate, 4),
            "casesCompleted": self.cases_completed,
            "caseSeconds": {k: round(v, 3) for k, v in sorted(self.case_seconds.items())},
            "elapsedSeconds": round(self.elapsed_seconds, 2),
        }
