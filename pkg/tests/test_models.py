"""
Tests for configuration and report models.
"""
import json
import logging
import math
from io import StringIO
from pathlib import Path

import pytest
from pydantic import ValidationError

from qfp.circuit import Circuit, h, x
from qfp.config import Settings, parse_float_list, parse_int_list
from qfp.models import (
    FormatSplit,
    OdeConfig,
    RecipBenchConfig,
    ResourceConfig,
    RunReport,
    StatsSnapshot,
)
from qfp.utils.logger import setup_logging
from qfp.utils.metrics import MetricsCollector


def test_format_split_checks_width():
    """Test e + m must equal the width."""
    assert FormatSplit(width=16, e=5, m=11).fmt.m == 11
    with pytest.raises(ValidationError):
        FormatSplit(width=16, e=5, m=12)


def test_format_split_defaults():
    """Test the built-in splits of the benchmark widths."""
    splits = RecipBenchConfig().splits

    assert [s.width for s in splits] == [10, 12, 14, 16, 18, 20]
    assert [s.m for s in splits] == [6, 7, 9, 11, 12, 13]
    assert [s.e for s in splits] == [4, 5, 5, 5, 6, 7]
    with pytest.raises(ValueError):
        FormatSplit.for_width(11)


def test_recip_config_defaults():
    """Test the reciprocal benchmark defaults."""
    config = RecipBenchConfig()

    assert config.samples == 100
    assert config.iterations == 10
    assert (config.mean, config.stddev) == (0.0, 5.0)
    assert config.backend == "semantic"


def test_backend_validation():
    """Test only the two backends are accepted."""
    assert RecipBenchConfig(backend="gate").backend == "gate"
    with pytest.raises(ValidationError):
        RecipBenchConfig(backend="analog")


def test_ode_config_defaults():
    """Test the ODE defaults and step count."""
    config = OdeConfig()

    assert [s.width for s in config.splits] == [14, 16, 18, 20]
    assert config.dts == [0.25, 0.125, 0.0625, 0.03125]
    assert config.horizon == pytest.approx(2 * math.pi)
    assert config.steps(2.0 ** -4) == 101


def test_resource_config_ops():
    """Test the survey accepts the float operations."""
    for op in ("add", "mul", "recip", "shift", "zeroexp"):
        assert ResourceConfig(op=op).op == op


def test_stats_snapshot_alias():
    """Test stats serialize with camelCase keys."""
    circuit = Circuit(2)
    circuit.emit(h(0))
    circuit.emit(x(1, [0]))
    data = StatsSnapshot.from_stats(circuit.stats()).model_dump(by_alias=True)

    assert data["gateCount"] == 2
    assert data["byArity"] == {1: 1, 2: 1}
    assert data["totalQubits"] == 2
    assert {"kind": "X", "arity": 2, "count": 1} in data["counts"]


def test_run_report_json():
    """Test the summary document echoes config, seed and version."""
    report = RunReport(
        command="encode",
        version="1.0.0",
        seed=7,
        config={"samples": 3},
        cases=[],
        metrics={},
        wall_seconds=0.5,
    )
    data = json.loads(report.model_dump_json(by_alias=True))

    assert data["wallSeconds"] == 0.5
    assert data["config"] == {"samples": 3}
    assert data["seed"] == 7


def test_parse_lists():
    """Test comma-separated flag parsing."""
    assert parse_int_list("10, 12,14") == [10, 12, 14]
    assert parse_float_list("2^-2,0.5,") == [0.25, 0.5]


def test_settings_from_env(monkeypatch):
    """Test QFP_* environment variables override defaults."""
    monkeypatch.setenv("QFP_NEWTON_ITERATIONS", "4")
    monkeypatch.setenv("QFP_DEFAULT_BACKEND", "gate")
    settings = Settings()

    assert settings.newton_iterations == 4
    assert settings.default_backend == "gate"


def test_metrics_collector():
    """Test counters and the camelCase snapshot."""
    metrics = MetricsCollector()
    metrics.record_sample()
    metrics.record_sample(discarded=True)
    metrics.record_circuit(100)
    metrics.record_case("w10", 1.23456)
    data = metrics.get_metrics()

    assert data["discardRate"] == 0.5
    assert data["gatesEmitted"] == 100
    assert data["caseSeconds"] == {"w10": 1.235}


def test_json_logging():
    """Test log records are written as JSON lines."""
    stream = StringIO()
    setup_logging("INFO", stream=stream)
    logging.getLogger("qfp.test").info("hello")
    record = json.loads(stream.getvalue().splitlines()[-1])

    assert record["message"] == "hello"
    assert record["level"] == "INFO"
    assert record["logger"] == "qfp.test"


def test_json_logging_includes_extra_fields():
    """Test fields passed under extra are merged into the JSON line."""
    stream = StringIO()
    setup_logging("INFO", stream=stream)
    logging.getLogger("qfp.test").info("dropped", extra={"extra": {"sample": 3, "reason": "encoding"}})
    record = json.loads(stream.getvalue().splitlines()[-1])

    assert record["message"] == "dropped"
    assert record["sample"] == 3
    assert record["reason"] == "encoding"


def test_project_readme_exists():
    """Test the readme named in pyproject.toml is present."""
    tomllib = pytest.importorskip("tomllib")
    root = Path(__file__).resolve().parents[1]
    project = tomllib.loads((root / "pyproject.toml").read_text())["project"]

    assert (root / project["readme"]).is_file()
