"""
Data models for experiment configuration and run reports.
"""
import math
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator

from qfp.circuit import CircuitStats
from qfp.config import settings
from qfp.errors import QfpError
from qfp.formats import ODE_SPLITS, WIDTH_SPLITS, FloatFormat

RESOURCE_OPS = ("add", "mul", "recip", "shift", "zeroexp", "neg", "exp")


class ConfigError(QfpError):
    """Raised for invalid command configuration."""
    pass


class FormatSplit(BaseModel):
    """Register width and its (exponent, mantissa) split."""
    width: int
    e: int
    m: int

    @model_validator(mode="after")
    def check_split(self) -> "FormatSplit":
        if self.e + self.m != self.width:
            raise ValueError(f"e + m must equal width: {self.e} + {self.m} != {self.width}")
        FloatFormat(self.e, self.m)
        return self

    @classmethod
    def for_width(cls, width: int, table: Dict[int, Tuple[int, int]] = WIDTH_SPLITS) -> "FormatSplit":
        if width not in table:
            raise ValueError(f"no default split for width {width}; pass --exponents/--mantissas")
        e, m = table[width]
        return cls(width=width, e=e, m=m)

    @property
    def fmt(self) -> FloatFormat:
        return FloatFormat(self.e, self.m)


def default_splits(widths: List[int], table: Dict[int, Tuple[int, int]] = WIDTH_SPLITS) -> List[FormatSplit]:
    return [FormatSplit.for_width(w, table) for w in widths]


class RecipBenchConfig(BaseModel):
    """Reciprocal benchmark: Gaussian inputs through the Newton circuit."""
    splits: List[FormatSplit] = Field(default_factory=lambda: default_splits([10, 12, 14, 16, 18, 20]))
    samples: int = Field(100, ge=1)
    iterations: int = Field(default_factory=lambda: settings.newton_iterations, ge=0)
    mean: float = 0.0
    stddev: float = Field(5.0, gt=0)
    seed: int = Field(default_factory=lambda: settings.seed, ge=0)
    backend: str = Field(default_factory=lambda: settings.default_backend)
    workers: int = Field(default_factory=lambda: settings.workers, ge=1)

    @field_validator("backend")
    @classmethod
    def check_backend(cls, value: str) -> str:
        if value not in ("semantic", "gate"):
            raise ValueError(f"backend must be 'semantic' or 'gate', got {value!r}")
        return value

    class Config:
        populate_by_name = True


class OdeConfig(BaseModel):
    """Trapezoidal integration of the rotation system u1' = u2, u2' = -u1."""
    splits: List[FormatSplit] = Field(default_factory=lambda: default_splits([14, 16, 18, 20], ODE_SPLITS))
    dts: List[float] = Field(default_factory=lambda: [2.0 ** -2, 2.0 ** -3, 2.0 ** -4, 2.0 ** -5])
    horizon: float = Field(2 * math.pi, gt=0)
    seed: int = Field(default_factory=lambda: settings.seed, ge=0)
    backend: str = Field(default_factory=lambda: settings.default_backend)
    workers: int = Field(default_factory=lambda: settings.workers, ge=1)

    @field_validator("dts")
    @classmethod
    def check_dts(cls, value: List[float]) -> List[float]:
        for dt in value:
            if dt <= 0 or math.frexp(dt)[0] != 0.5:
                raise ValueError(f"time step {dt} is not a power of two")
        return value

    @field_validator("backend")
    @classmethod
    def check_backend(cls, value: str) -> str:
        if value not in ("semantic", "gate"):
            raise ValueError(f"backend must be 'semantic' or 'gate', got {value!r}")
        return value

    def steps(self, dt: float) -> int:
        return round(self.horizon / dt)

    class Config:
        populate_by_name = True


class ResourceConfig(BaseModel):
    """Resource survey of one float operation across widths."""
    op: str
    splits: List[FormatSplit] = Field(default_factory=lambda: default_splits([10, 12, 14, 16, 18, 20]))
    iterations: int = Field(default_factory=lambda: settings.newton_iterations, ge=0)
    order: int = Field(default_factory=lambda: settings.horner_order, ge=1)
    dump: Optional[str] = None

    @field_validator("op")
    @classmethod
    def check_op(cls, value: str) -> str:
        if value not in RESOURCE_OPS:
            raise ValueError(f"unknown op {value!r}; choose from {', '.join(RESOURCE_OPS)}")
        return value


class GateCount(BaseModel):
    kind: str
    arity: int
    count: int


class StatsSnapshot(BaseModel):
    """JSON form of CircuitStats."""
    counts: List[GateCount]
    gate_count: int = Field(..., alias="gateCount")
    by_arity: Dict[int, int] = Field(..., alias="byArity")
    depth: int
    ancilla_high_water: int = Field(..., alias="ancillaHighWater")
    total_qubits: int = Field(..., alias="totalQubits")

    @classmethod
    def from_stats(cls, stats: CircuitStats) -> "StatsSnapshot":
        return cls(
            counts=[GateCount(kind=k, arity=a, count=c) for k, a, c in stats.rows()],
            gate_count=stats.gate_count,
            by_arity=stats.by_arity(),
            depth=stats.depth,
            ancilla_high_water=stats.ancilla_high_water,
            total_qubits=stats.total_qubits,
        )

    class Config:
        populate_by_name = True


class ErrorSummary(BaseModel):
    """Aggregate of a list of errors; empty lists give count 0 and no values."""
    count: int
    mean: Optional[float] = None
    std: Optional[float] = None
    min: Optional[float] = None
    max: Optional[float] = None
    mean_abs: Optional[float] = Field(None, alias="meanAbs")

    class Config:
        populate_by_name = True


class CaseReport(BaseModel):
    """One (width, ...) case of a command."""
    width: int
    e: int
    m: int
    dt: Optional[float] = None
    steps: Optional[int] = None
    stats: StatsSnapshot
    errors: Optional[ErrorSummary] = None
    final_error: Optional[float] = Field(None, alias="finalError")
    discarded: int = 0
    seconds: float = 0.0

    class Config:
        populate_by_name = True


class RunReport(BaseModel):
    """Summary document written next to a command's CSV."""
    command: str
    version: str
    seed: Optional[int] = None
    config: dict
    cases: List[CaseReport]
    extra: Dict[str, object] = Field(default_factory=dict)
    metrics: dict
    wall_seconds: float = Field(..., alias="wallSeconds")

    class Config:
        populate_by_name = True
