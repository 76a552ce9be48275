"""
Experiment services behind the command-line surface.

Each service builds the circuits for one experiment, runs them case by case
(optionally in a process pool) and returns plot-ready tables plus case
reports. Cases are returned in config order regardless of completion order.
"""
import logging
import math
import time
from dataclasses import dataclass, replace
from multiprocessing import Pool
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from qfp.backends import Executor, run
from qfp.circuit import Circuit, CircuitStats, GateKind, MacroOp
from qfp.fixed_arith import FixedReg, register
from qfp.float_arith import (
    FloatReg,
    fadd,
    fexp,
    float_register,
    fmul,
    fneg,
    load_const,
    recip,
    reset_register,
    shift,
    zero_exp,
)
from qfp.formats import FixedFormat, FloatFormat
from qfp.models import (
    CaseReport,
    ErrorSummary,
    FormatSplit,
    OdeConfig,
    RecipBenchConfig,
    ResourceConfig,
    StatsSnapshot,
)
from qfp.oracle import (
    EncodingError,
    OdeConstants,
    o_encode,
    o_ode_reference,
    o_recip,
)
from qfp.state import RngStream, SparseState, State

logger = logging.getLogger(__name__)

RECIP_COLUMNS = ["width", "e", "m", "sample", "input", "expected", "output", "signed_rel_err", "discarded"]
ODE_COLUMNS = ["width", "dt", "step", "t", "u1", "u2", "u1_exact", "u2_exact", "l2_rel_err"]
RESOURCE_COLUMNS = ["op", "width", "kind", "arity", "count", "depth", "total_qubits", "ancilla_peak"]


def summarize_errors(errors: Sequence[float]) -> ErrorSummary:
    """Mean, spread and range of a list of signed errors."""
    if not errors:
        return ErrorSummary(count=0)
    values = np.asarray(errors, dtype=float)
    return ErrorSummary(
        count=len(values),
        mean=float(values.mean()),
        std=float(values.std()),
        min=float(values.min()),
        max=float(values.max()),
        mean_abs=float(np.abs(values).mean()),
    )


def running_l2_error(trajectory: np.ndarray, exact: np.ndarray) -> np.ndarray:
    """||traj - exact||_2 / ||exact||_2 over all samples up to each step."""
    diff = np.cumsum(np.sum((trajectory - exact) ** 2, axis=1))
    norm = np.cumsum(np.sum(exact ** 2, axis=1))
    return np.sqrt(diff / norm)


def dominant_index(state: State) -> int:
    """Basis index with the largest probability (lowest index on ties)."""
    probabilities = state.probabilities()
    return max(sorted(probabilities), key=lambda i: probabilities[i])


def r_squared(x: Sequence[float], y: Sequence[float], degree: int) -> Optional[float]:
    """Coefficient of determination of a least-squares polynomial fit."""
    xs, ys = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if len(xs) <= degree:
        return None
    coeffs = np.polyfit(xs, ys, degree)
    residual = np.sum((ys - np.polyval(coeffs, xs)) ** 2)
    total = np.sum((ys - ys.mean()) ** 2)
    return 1.0 if total == 0 else float(1.0 - residual / total)


def map_cases(func: Callable, cases: list, workers: int) -> list:
    """Run cases inline or in a process pool; results keep input order."""
    if workers <= 1 or len(cases) <= 1:
        return [func(case) for case in cases]
    with Pool(processes=min(workers, len(cases))) as pool:
        return pool.map(func, cases)


# Reciprocal benchmark


def recip_inputs(config: RecipBenchConfig) -> List[float]:
    """Gaussian draws; sample i depends only on (seed, i)."""
    return [
        RngStream.for_sample(config.seed, i).normal(config.mean, config.stddev)
        for i in range(config.samples)
    ]


@dataclass
class RecipCircuit:
    circuit: Circuit
    q: FloatReg
    result: FloatReg


def build_recip(fmt: FloatFormat, iterations: int) -> RecipCircuit:
    circuit = Circuit(name=f"recip{fmt}")
    q = float_register(circuit, "q", fmt)
    result = recip(circuit, q, iterations)
    return RecipCircuit(circuit, q, result)


def _recip_case(args: Tuple[RecipBenchConfig, FormatSplit]) -> Tuple[List[dict], CaseReport]:
    config, split = args
    started = time.time()
    fmt = split.fmt
    built = build_recip(fmt, config.iterations)
    rows = []
    errors = []
    discarded = 0

    for i, draw in enumerate(recip_inputs(config)):
        row = dict(width=split.width, e=split.e, m=split.m, sample=i, input=draw,
                   expected=math.nan, output=math.nan, signed_rel_err=math.nan, discarded=True)
        try:
            encoded = o_encode(draw, fmt)
        except EncodingError as e:
            logger.info(
                f"Discarded sample {i} at width {split.width}: {e}",
                extra={"extra": {"sample": i, "width": split.width, "reason": "encoding"}},
            )
            discarded += 1
            rows.append(row)
            continue
        reference = o_recip(encoded, config.iterations)
        row["input"] = encoded.value
        if not reference.ok:
            logger.info(
                f"Discarded sample {i} at width {split.width}: reciprocal of {encoded.value} is {reference.status.value}",
                extra={"extra": {"sample": i, "width": split.width, "reason": reference.status.value}},
            )
            discarded += 1
            rows.append(row)
            continue

        initial = SparseState.basis(built.circuit.num_qubits, built.q.write(0, encoded))
        state, _ = run(built.circuit, initial, config.backend, RngStream.for_sample(config.seed, i))
        output = built.result.value(dominant_index(state))
        expected = 1.0 / encoded.value
        error = (output - expected) / expected
        row.update(expected=expected, output=output, signed_rel_err=error, discarded=False)
        errors.append(error)
        rows.append(row)

    report = CaseReport(
        width=split.width,
        e=split.e,
        m=split.m,
        stats=StatsSnapshot.from_stats(built.circuit.stats()),
        errors=summarize_errors(errors),
        discarded=discarded,
        seconds=time.time() - started,
    )
    logger.info(
        f"Reciprocal width {split.width} done: {len(errors)} kept, {discarded} discarded, "
        f"{report.seconds:.2f}s"
    )
    return rows, report


class RecipBenchmark:
    """
    Signed relative error of the Newton reciprocal circuit.

    Every width sees the same Gaussian draws; the expected value is the
    double-precision reciprocal of the encoded input.
    """

    def __init__(self, config: RecipBenchConfig):
        self.config = config

    def run(self) -> Tuple[pd.DataFrame, List[CaseReport]]:
        cases = [(self.config, split) for split in self.config.splits]
        results = map_cases(_recip_case, cases, self.config.workers)
        rows = [row for case_rows, _ in results for row in case_rows]
        table = pd.DataFrame(rows, columns=RECIP_COLUMNS)
        return table, [report for _, report in results]


# ODE integration


@dataclass
class OdeCircuit:
    """Registers and macro-ops of the trapezoidal integrator."""

    circuit: Circuit
    u: Tuple[FloatReg, FloatReg]
    v: Tuple[FloatReg, FloatReg]
    prep: MacroOp
    step_uv: MacroOp
    step_vu: MacroOp


def _trapezoid_step(circuit: Circuit, consts, src, dst, scratch) -> None:
    c11, c12, c12n = consts
    p1, p2 = scratch
    fmul(circuit, c11, src[0], p1)
    fmul(circuit, c12, src[1], p2)
    fadd(circuit, p1, p2, dst[0])
    reset_register(circuit, p1)
    reset_register(circuit, p2)
    fmul(circuit, c12n, src[0], p1)
    fmul(circuit, c11, src[1], p2)
    fadd(circuit, p1, p2, dst[1])
    for reg in (p1, p2) + tuple(src):
        reset_register(circuit, reg)


def build_ode(fmt: FloatFormat, dt: float) -> OdeCircuit:
    """
    Integrator circuit: a preparation macro and two step macros that move the
    state from u to v and back.
    """
    circuit = Circuit(name=f"ode{fmt}dt{dt}")
    u = (float_register(circuit, "u1", fmt), float_register(circuit, "u2", fmt))
    v = (float_register(circuit, "v1", fmt), float_register(circuit, "v2", fmt))
    scratch = (float_register(circuit, "p1", fmt), float_register(circuit, "p2", fmt))
    regs = [float_register(circuit, name, fmt) for name in ("c11", "c12", "c12n")]
    c = OdeConstants.for_step(dt)

    with circuit.macro("prep") as prep:
        load_const(circuit, regs[0], c.c11)
        load_const(circuit, regs[1], c.c12)
        load_const(circuit, regs[2], -c.c12)
        load_const(circuit, u[0], 0.0)
        load_const(circuit, u[1], -1.0)
    with circuit.macro("step_uv") as step_uv:
        _trapezoid_step(circuit, regs, u, v, scratch)
    with circuit.macro("step_vu") as step_vu:
        _trapezoid_step(circuit, regs, v, u, scratch)
    return OdeCircuit(circuit, u, v, prep, step_uv, step_vu)


def ode_trajectory_stats(built: OdeCircuit, steps: int) -> CircuitStats:
    """Gate counts and depth of the full trajectory, replayed without storing ops."""
    counter = Circuit(built.circuit.num_qubits, name="ode-count", keep_ops=False)
    programs = [built.prep] + [built.step_uv if k % 2 == 0 else built.step_vu for k in range(steps)]
    for macro in programs:
        for gate in macro.gates():
            counter.emit(gate)
    return replace(counter.stats(), ancilla_high_water=built.circuit.pool.high_water)


def _ode_case(args: Tuple[OdeConfig, FormatSplit, float]) -> Tuple[List[dict], CaseReport]:
    config, split, dt = args
    started = time.time()
    steps = config.steps(dt)
    built = build_ode(split.fmt, dt)
    executor = Executor(config.backend, RngStream.for_sample(config.seed, split.width))
    state: State = SparseState.basis(built.circuit.num_qubits)
    state = executor.apply(built.prep, state)

    samples = np.empty((steps + 1, 2))
    index = dominant_index(state)
    samples[0] = (built.u[0].value(index), built.u[1].value(index))
    for k in range(steps):
        forward = k % 2 == 0
        state = executor.apply(built.step_uv if forward else built.step_vu, state)
        current = built.v if forward else built.u
        index = dominant_index(state)
        samples[k + 1] = (current[0].value(index), current[1].value(index))

    _, exact = o_ode_reference(dt, steps)
    errors = running_l2_error(samples, exact)
    t = np.arange(steps + 1) * dt
    table = pd.DataFrame({
        "width": split.width,
        "dt": dt,
        "step": np.arange(steps + 1),
        "t": t,
        "u1": samples[:, 0],
        "u2": samples[:, 1],
        "u1_exact": exact[:, 0],
        "u2_exact": exact[:, 1],
        "l2_rel_err": errors,
    })

    report = CaseReport(
        width=split.width,
        e=split.e,
        m=split.m,
        dt=dt,
        steps=steps,
        stats=StatsSnapshot.from_stats(ode_trajectory_stats(built, steps)),
        final_error=float(errors[-1]),
        seconds=time.time() - started,
    )
    logger.info(
        f"ODE width {split.width} dt {dt} done: {steps} steps, final error {report.final_error:.3e}, "
        f"{report.seconds:.2f}s"
    )
    return table.to_dict("records"), report


class OdeExperiment:
    """Trapezoidal integration in float circuits against the analytic solution."""

    def __init__(self, config: OdeConfig):
        self.config = config

    def run(self) -> Tuple[pd.DataFrame, List[CaseReport]]:
        cases = [(self.config, split, dt) for split in self.config.splits for dt in self.config.dts]
        results = map_cases(_ode_case, cases, self.config.workers)
        rows = [row for case_rows, _ in results for row in case_rows]
        table = pd.DataFrame(rows, columns=ODE_COLUMNS)
        return table, [report for _, report in results]


# Resource survey


def build_op(op: str, fmt: FloatFormat, iterations: int = 10, order: int = 12) -> Circuit:
    """Circuit of a single float operation on fresh input registers."""
    circuit = Circuit(name=f"{op}{fmt}")
    q = float_register(circuit, "q", fmt)
    if op in ("add", "mul"):
        r = float_register(circuit, "r", fmt)
        out = float_register(circuit, "out", fmt)
        (fadd if op == "add" else fmul)(circuit, q, r, out)
    elif op == "recip":
        recip(circuit, q, iterations)
    elif op == "shift":
        amount: FixedReg = register(circuit, "s", FixedFormat(fmt.e + 1, 0, True))
        shift(circuit, q.mant, amount)
    elif op == "zeroexp":
        zero_exp(circuit, q)
    elif op == "neg":
        fneg(circuit, q)
    elif op == "exp":
        fexp(circuit, q, order)
    else:
        raise ValueError(f"unknown op {op!r}")
    return circuit


class ResourceSurvey:
    """Gate counts by kind and arity, depth and ancilla peak per width."""

    def __init__(self, config: ResourceConfig):
        self.config = config
        self.largest: Optional[Circuit] = None

    def run(self) -> Tuple[pd.DataFrame, List[CaseReport], Dict[str, Optional[float]]]:
        rows = []
        reports = []
        for split in sorted(self.config.splits, key=lambda s: s.width):
            started = time.time()
            circuit = build_op(self.config.op, split.fmt, self.config.iterations, self.config.order)
            stats = circuit.stats()
            for kind, arity, count in stats.rows():
                rows.append(dict(op=self.config.op, width=split.width, kind=kind, arity=arity, count=count,
                                 depth=stats.depth, total_qubits=stats.total_qubits,
                                 ancilla_peak=stats.ancilla_high_water))
            reports.append(CaseReport(width=split.width, e=split.e, m=split.m,
                                      stats=StatsSnapshot.from_stats(stats),
                                      seconds=time.time() - started))
            self.largest = circuit
            logger.info(f"Surveyed {self.config.op} at width {split.width}: {stats.gate_count} gates")
        return pd.DataFrame(rows, columns=RESOURCE_COLUMNS), reports, self.fits(reports)

    @staticmethod
    def fits(reports: List[CaseReport]) -> Dict[str, Optional[float]]:
        """R^2 of linear fits per arity class and a quadratic fit of controlled phases."""
        widths = [r.width for r in reports]
        fits: Dict[str, Optional[float]] = {}
        for arity in (1, 2, 3):
            totals = [r.stats.by_arity.get(arity, 0) for r in reports]
            fits[f"linearR2Arity{arity}"] = r_squared(widths, totals, 1)
        phases = [
            sum(g.count for g in r.stats.counts if g.kind == GateKind.PHASE.value and g.arity >= 2)
            for r in reports
        ]
        fits["quadraticR2ControlledPhase"] = r_squared(widths, phases, 2)
        return fits
