"""
Circuit execution backends.

gate-faithful: every elementary gate is applied to the wavefunction, and
RESET runs the Hadamard / measure / conditional-X protocol.

semantic: macro-ops that carry a classical transition are applied to each
stored basis index directly. Other gates are compiled into per-index steps
where they permute basis states or multiply phases. RESET becomes the
outcome-0 projection (the ancilla bit is cleared) and the number of components
whose sign the protocol could have flipped is recorded.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Tuple, Union

from qfp.circuit import Circuit, GateKind, GateOp, MacroOp
from qfp.config import settings
from qfp.errors import QfpError
from qfp.state import (
    DenseState,
    RngStream,
    SparseState,
    State,
    apply_gate,
    measure_qubit,
    reset_ancilla,
    to_dense,
    to_sparse,
)

logger = logging.getLogger(__name__)

Step = Callable[[int, complex], Tuple[int, complex]]
Executable = Union[GateOp, MacroOp, Circuit]


class SemanticsError(QfpError):
    """Raised when the semantic backend meets an op with no classical meaning."""
    pass


class Backend(str, Enum):
    GATE = "gate"
    SEMANTIC = "semantic"

    @classmethod
    def parse(cls, value: Union[str, "Backend"]) -> "Backend":
        if isinstance(value, Backend):
            return value
        aliases = {"gate": cls.GATE, "gate-faithful": cls.GATE, "semantic": cls.SEMANTIC}
        try:
            return aliases[value.lower()]
        except KeyError:
            raise SemanticsError(f"unknown backend {value!r}")


@dataclass(frozen=True)
class ResetEvent:
    """One executed reset: measured bit and how many components carried a 1."""

    qubit: int
    outcome: int
    flipped: int


@dataclass
class MeasurementRecord:
    measurements: List[Tuple[int, int]] = field(default_factory=list)
    resets: List[ResetEvent] = field(default_factory=list)

    @property
    def outcomes(self) -> List[int]:
        return [bit for _, bit in self.measurements]


# Compiled instruction: ("steps", [Step, ...]) | ("reset", qubit) | ("measure", qubit)
Instruction = Tuple[str, object]


def _gate_step(gate: GateOp) -> Step:
    mask, value = gate.control_masks()
    kind = gate.kind

    if kind == GateKind.SWAP:
        bit_a, bit_b = 1 << gate.targets[0], 1 << gate.targets[1]
        both = bit_a | bit_b

        def swap_step(index: int, amp: complex) -> Tuple[int, complex]:
            if (index & mask) == value and bool(index & bit_a) != bool(index & bit_b):
                index ^= both
            return index, amp

        return swap_step

    bit = 1 << gate.targets[0]
    if kind == GateKind.X:

        def x_step(index: int, amp: complex) -> Tuple[int, complex]:
            if (index & mask) == value:
                index ^= bit
            return index, amp

        return x_step

    if kind in (GateKind.Z, GateKind.PHASE):
        factor = -1.0 if kind == GateKind.Z else complex(math.cos(gate.angle), math.sin(gate.angle))

        def phase_step(index: int, amp: complex) -> Tuple[int, complex]:
            if (index & mask) == value and index & bit:
                amp *= factor
            return index, amp

        return phase_step

    if kind == GateKind.Y:

        def y_step(index: int, amp: complex) -> Tuple[int, complex]:
            if (index & mask) == value:
                amp *= -1j if index & bit else 1j
                index ^= bit
            return index, amp

        return y_step

    raise SemanticsError(f"{kind.value} has no basis-permutation semantics")


def _transition_step(transition: Callable[[int], int]) -> Step:
    def step(index: int, amp: complex) -> Tuple[int, complex]:
        return transition(index), amp

    return step


class Executor:
    """
    Applies gates, macro-ops and circuits to a state with one backend.

    Args:
        backend: "semantic" or "gate" (gate-faithful)
        rng: Stream for measurement and reset outcomes
        record: Measurement record to append to; a new one by default
    """

    def __init__(
        self,
        backend: Union[str, Backend, None] = None,
        rng: Optional[RngStream] = None,
        record: Optional[MeasurementRecord] = None,
    ):
        self.backend = Backend.parse(backend or settings.default_backend)
        self.rng = rng if rng is not None else RngStream(settings.seed)
        self.record = record if record is not None else MeasurementRecord()
        self._programs: Dict[int, Tuple[object, List[Instruction]]] = {}

    def apply(self, op: Executable, state: State) -> State:
        """Run one op (or a whole circuit) and return the resulting state."""
        if self.backend == Backend.GATE:
            return self._apply_gates(op, state)

        dense = isinstance(state, DenseState)
        sparse = to_sparse(state) if dense else state
        sparse = self._apply_semantic(op, sparse)
        return to_dense(sparse, cap=state.num_qubits) if dense else sparse

    # gate-faithful

    def _apply_gates(self, op: Executable, state: State) -> State:
        if isinstance(op, (Circuit, MacroOp)):
            for gate in op.gates():
                state = self._apply_gate(gate, state)
            return state
        return self._apply_gate(op, state)

    def _apply_gate(self, gate: GateOp, state: State) -> State:
        if gate.kind == GateKind.MEASURE:
            outcome, state = measure_qubit(state, gate.targets[0], self.rng)
            self.record.measurements.append((gate.targets[0], outcome))
            return state
        if gate.kind == GateKind.RESET:
            qubit = gate.targets[0]
            flipped = _count_set(state, qubit)
            outcomes: List[int] = []
            state = reset_ancilla(state, qubit, self.rng, outcomes)
            self.record.resets.append(ResetEvent(qubit, outcomes[0], flipped))
            return state
        return apply_gate(state, gate)

    # semantic

    def compile(self, op: Executable) -> List[Instruction]:
        """Lower an op to semantic instructions; cached per op object."""
        cached = self._programs.get(id(op))
        if cached is not None and cached[0] is op:
            return cached[1]
        program: List[Instruction] = []
        self._lower(op, program)
        self._programs[id(op)] = (op, program)
        return program

    def _lower(self, op: Executable, program: List[Instruction]) -> None:
        if isinstance(op, Circuit):
            for child in op.ops:
                self._lower(child, program)
            return
        if isinstance(op, MacroOp):
            if op.transition is not None:
                self._push_step(program, _transition_step(op.transition))
                return
            for child in op.ops:
                self._lower(child, program)
            return
        if op.kind == GateKind.RESET:
            program.append(("reset", op.targets[0]))
        elif op.kind == GateKind.MEASURE:
            program.append(("measure", op.targets[0]))
        else:
            self._push_step(program, _gate_step(op))

    @staticmethod
    def _push_step(program: List[Instruction], step: Step) -> None:
        if program and program[-1][0] == "steps":
            program[-1][1].append(step)
        else:
            program.append(("steps", [step]))

    def _apply_semantic(self, op: Executable, state: SparseState) -> SparseState:
        for kind, payload in self.compile(op):
            if kind == "steps":
                state = _run_steps(state, payload)
            elif kind == "reset":
                state = self._semantic_reset(state, payload)
            else:
                outcome, state = measure_qubit(state, payload, self.rng)
                self.record.measurements.append((payload, outcome))
        return state

    def _semantic_reset(self, state: SparseState, qubit: int) -> SparseState:
        bit = 1 << qubit
        flipped = 0
        out: Dict[int, complex] = {}
        for index, amp in state.entries.items():
            if index & bit:
                flipped += 1
                index ^= bit
            out[index] = out.get(index, 0j) + amp
        state.entries = out
        if flipped:
            state.prune().normalize()
        self.record.resets.append(ResetEvent(qubit, 0, flipped))
        return state


def _run_steps(state: SparseState, steps: List[Step]) -> SparseState:
    before = len(state.entries)
    out: Dict[int, complex] = {}
    for index, amp in state.entries.items():
        for step in steps:
            index, amp = step(index, amp)
        out[index] = out.get(index, 0j) + amp
    state.entries = out
    # Merged components change the norm
    if len(out) != before:
        state.prune().normalize()
    return state


def _count_set(state: State, qubit: int) -> int:
    bit = 1 << qubit
    if isinstance(state, DenseState):
        return sum(1 for i in state.probabilities() if i & bit)
    return sum(1 for i in state.entries if i & bit)


def run(
    circuit: Circuit,
    initial: State,
    backend: Union[str, Backend, None] = None,
    rng: Optional[RngStream] = None,
) -> Tuple[State, MeasurementRecord]:
    """
    Execute a circuit on a copy of the initial state.

    Returns:
        Final state and the record of measurements and resets

    Raises:
        SemanticsError: If the semantic backend meets a gate with no
            classical meaning outside a macro-op transition
    """
    executor = Executor(backend, rng)
    state = executor.apply(circuit, initial.copy())
    logger.debug(
        f"Ran {circuit.name} on {executor.backend.value} backend: "
        f"{len(executor.record.measurements)} measurements, {len(executor.record.resets)} resets"
    )
    return state, executor.record
