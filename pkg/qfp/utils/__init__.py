"""Utility modules."""
from qfp.utils.logger import setup_logging
from qfp.utils.metrics import MetricsCollector

__all__ = ["setup_logging", "MetricsCollector"]
