"""
Circuit intermediate representation.

A circuit is an ordered list of gates and named macro-ops. Macro-ops group the
gates of one arithmetic fragment and may carry the classical basis-state
transition that the semantic backend applies instead of the gates.
Gate counts and ASAP depth are maintained incrementally on every emit.
"""
import logging
from collections import Counter
from contextlib import contextmanager
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Set, Tuple, Union

from qfp.errors import QfpError

logger = logging.getLogger(__name__)

Transition = Callable[[int], int]
ControlSpec = Union["Control", Tuple[int, bool], int]


class CircuitError(QfpError):
    """Raised when a gate or circuit operation violates the IR invariants."""
    pass


class GateKind(str, Enum):
    """Elementary operations of the gate set."""

    X = "X"
    Y = "Y"
    Z = "Z"
    H = "H"
    PHASE = "PHASE"
    SWAP = "SWAP"
    MEASURE = "MEASURE"
    RESET = "RESET"


SELF_INVERSE = {GateKind.X, GateKind.Y, GateKind.Z, GateKind.H, GateKind.SWAP}
MAX_CONTROLS = {
    GateKind.X: 2,
    GateKind.Y: 2,
    GateKind.Z: 2,
    GateKind.PHASE: 2,
    GateKind.H: 1,
    GateKind.SWAP: 1,
    GateKind.MEASURE: 0,
    GateKind.RESET: 0,
}


@dataclass(frozen=True)
class Control:
    """Control qubit; on_one=False controls on |0> (the overlined qubit)."""

    qubit: int
    on_one: bool = True

    @classmethod
    def of(cls, spec: ControlSpec) -> "Control":
        """Normalize an int, (qubit, polarity) pair or Control."""
        if isinstance(spec, Control):
            return spec
        if isinstance(spec, tuple):
            return cls(int(spec[0]), bool(spec[1]))
        return cls(int(spec), True)

    def __str__(self) -> str:
        return f"({self.qubit},{'+' if self.on_one else '-'})"


@dataclass(frozen=True)
class GateOp:
    """One elementary gate with polarity-tagged controls."""

    kind: GateKind
    targets: Tuple[int, ...]
    controls: Tuple[Control, ...] = ()
    angle: Optional[float] = None

    def __post_init__(self):
        expected_targets = 2 if self.kind == GateKind.SWAP else 1
        if len(self.targets) != expected_targets:
            raise CircuitError(
                f"{self.kind.value} takes {expected_targets} target(s), got {len(self.targets)}"
            )
        if len(self.controls) > MAX_CONTROLS[self.kind]:
            raise CircuitError(
                f"{self.kind.value} allows at most {MAX_CONTROLS[self.kind]} control(s)"
            )
        if self.kind == GateKind.PHASE:
            if self.angle is None or self.angle != self.angle or abs(self.angle) == float("inf"):
                raise CircuitError("PHASE needs a finite angle")
        elif self.angle is not None:
            raise CircuitError(f"{self.kind.value} takes no angle")
        qubits = self.qubits
        if len(set(qubits)) != len(qubits):
            raise CircuitError(f"duplicate qubit in {self.kind.value} gate: {qubits}")
        if any(q < 0 for q in qubits):
            raise CircuitError(f"negative qubit index in {self.kind.value} gate")

    @property
    def qubits(self) -> Tuple[int, ...]:
        """Targets followed by control qubits."""
        return self.targets + tuple(c.qubit for c in self.controls)

    @property
    def arity(self) -> int:
        """Total qubits touched (controls included)."""
        return len(self.targets) + len(self.controls)

    def control_masks(self) -> Tuple[int, int]:
        """(mask, value) such that controls hold iff index & mask == value."""
        mask = 0
        value = 0
        for ctrl in self.controls:
            mask |= 1 << ctrl.qubit
            if ctrl.on_one:
                value |= 1 << ctrl.qubit
        return mask, value

    def adjoint(self) -> "GateOp":
        """Inverse gate; PHASE negates its angle."""
        if self.kind in SELF_INVERSE:
            return self
        if self.kind == GateKind.PHASE:
            return GateOp(self.kind, self.targets, self.controls, -self.angle)
        raise CircuitError(f"{self.kind.value} has no adjoint")

    def dump(self) -> str:
        """Stable one-line text form used by circuit dumps."""
        targets = ",".join(str(t) for t in self.targets)
        controls = ",".join(str(c) for c in self.controls)
        line = f"{self.kind.value} targets=[{targets}] controls=[{controls}]"
        if self.kind == GateKind.PHASE:
            line += f" angle={self.angle:.17g}"
        return line


def _controls(controls: Sequence[ControlSpec]) -> Tuple[Control, ...]:
    return tuple(Control.of(c) for c in controls)


def x(target: int, controls: Sequence[ControlSpec] = ()) -> GateOp:
    """X, CX or CCX depending on the number of controls."""
    return GateOp(GateKind.X, (target,), _controls(controls))


def y(target: int, controls: Sequence[ControlSpec] = ()) -> GateOp:
    return GateOp(GateKind.Y, (target,), _controls(controls))


def z(target: int, controls: Sequence[ControlSpec] = ()) -> GateOp:
    return GateOp(GateKind.Z, (target,), _controls(controls))


def h(target: int, controls: Sequence[ControlSpec] = ()) -> GateOp:
    return GateOp(GateKind.H, (target,), _controls(controls))


def phase(target: int, angle: float, controls: Sequence[ControlSpec] = ()) -> GateOp:
    """diag(1, e^{i angle}) on the target."""
    return GateOp(GateKind.PHASE, (target,), _controls(controls), float(angle))


def swap(a: int, b: int, controls: Sequence[ControlSpec] = ()) -> GateOp:
    return GateOp(GateKind.SWAP, (a, b), _controls(controls))


def measure(target: int) -> GateOp:
    return GateOp(GateKind.MEASURE, (target,))


def reset(target: int) -> GateOp:
    """Ancilla reset: H, measure, X on outcome 1."""
    return GateOp(GateKind.RESET, (target,))


class MacroOp:
    """Named group of ops, optionally carrying a classical transition."""

    __slots__ = ("name", "ops", "transition")

    def __init__(self, name: str, transition: Optional[Transition] = None):
        self.name = name
        self.ops: List[Union[GateOp, "MacroOp"]] = []
        self.transition = transition

    def gates(self) -> Iterator[GateOp]:
        """Flatten to elementary gates in emission order."""
        for op in self.ops:
            if isinstance(op, MacroOp):
                yield from op.gates()
            else:
                yield op

    def __repr__(self) -> str:
        return f"MacroOp({self.name!r}, ops={len(self.ops)})"


@dataclass(frozen=True)
class CircuitStats:
    """Immutable resource snapshot of a circuit."""

    counts: Dict[Tuple[str, int], int] = field(default_factory=dict)
    depth: int = 0
    ancilla_high_water: int = 0
    total_qubits: int = 0

    @property
    def gate_count(self) -> int:
        return sum(self.counts.values())

    def count(self, kind: Union[GateKind, str], arity: int) -> int:
        """Number of gates of one kind and arity."""
        key = kind.value if isinstance(kind, GateKind) else kind
        return self.counts.get((key, arity), 0)

    def by_arity(self) -> Dict[int, int]:
        """Totals per arity class (1-, 2- and 3-qubit operations)."""
        totals: Dict[int, int] = {}
        for (_, arity), count in self.counts.items():
            totals[arity] = totals.get(arity, 0) + count
        return dict(sorted(totals.items()))

    def rows(self) -> List[Tuple[str, int, int]]:
        """(kind, arity, count) rows in a stable order."""
        return [(kind, arity, count) for (kind, arity), count in sorted(self.counts.items())]


class AncillaPool:
    """
    Scratch-qubit allocator with a high-water mark.

    Released qubits are reset with the ancilla-reset protocol unless the
    builder declares them uncomputed, and only then become allocatable again.
    """

    def __init__(self, circuit: "Circuit", label: str = "anc"):
        self.circuit = circuit
        self.label = label
        self._free: List[int] = []
        self._live: Set[int] = set()
        self.high_water = 0

    @property
    def live(self) -> int:
        return len(self._live)

    def allocate(self, count: int = 1) -> List[int]:
        """Hand out `count` qubits known to be |0>."""
        qubits = []
        for _ in range(count):
            if self._free:
                qubits.append(self._free.pop(0))
            else:
                qubits.extend(self.circuit.allocate_qubits(1, self.label))
        self._live.update(qubits)
        self.high_water = max(self.high_water, len(self._live))
        return qubits

    def release(self, qubits: Sequence[int], uncomputed: bool = False) -> None:
        """
        Return qubits to the pool.

        Args:
            qubits: Ancillae previously handed out by allocate()
            uncomputed: The builder guarantees the qubits are back in |0>
                (adjoint-pair discipline); no reset is emitted

        Raises:
            CircuitError: If a qubit is not a live ancilla of this pool
        """
        for q in qubits:
            if q not in self._live:
                raise CircuitError(f"qubit {q} is not a live ancilla")
            if uncomputed:
                self.circuit.fresh.add(q)
            else:
                self.circuit.ensure_fresh(q)
            self._live.discard(q)
            self._free.append(q)
        self._free.sort()


class Circuit:
    """
    Ordered gate list with register labels, freshness tracking and stats.

    Args:
        num_qubits: Qubits allocated up front (unlabelled)
        name: Label used in logs and dumps
        keep_ops: Store emitted ops; a counting-only circuit keeps just the
            incremental stats, for very long programs
    """

    def __init__(self, num_qubits: int = 0, name: str = "circuit", keep_ops: bool = True):
        self.name = name
        self.num_qubits = 0
        self.keep_ops = keep_ops
        self.ops: List[Union[GateOp, MacroOp]] = []
        self.labels: Dict[str, List[int]] = {}
        self.fresh: Set[int] = set()
        self.pool = AncillaPool(self)
        self.version = 0
        self._stack: List[MacroOp] = []
        self._counts: Counter = Counter()
        self._layer: Dict[int, int] = {}
        self._depth = 0
        if num_qubits:
            self.allocate_qubits(num_qubits)

    def allocate_qubits(self, count: int, label: Optional[str] = None) -> List[int]:
        """Append `count` new qubits in |0>."""
        qubits = list(range(self.num_qubits, self.num_qubits + count))
        self.num_qubits += count
        self.fresh.update(qubits)
        if label is not None:
            self.labels.setdefault(label, []).extend(qubits)
        return qubits

    def add_register(self, name: str, size: int) -> List[int]:
        """Allocate a named register, LSB first."""
        if name in self.labels:
            raise CircuitError(f"register {name!r} already exists")
        return self.allocate_qubits(size, name)

    def emit(self, gate: GateOp) -> "Circuit":
        """Append a gate and update counts, depth and freshness."""
        for q in gate.qubits:
            if q >= self.num_qubits:
                raise CircuitError(
                    f"gate {gate.dump()} references unallocated qubit {q} "
                    f"(circuit has {self.num_qubits})"
                )
        if self.keep_ops:
            container = self._stack[-1].ops if self._stack else self.ops
            container.append(gate)
        self.version += 1

        self._counts[(gate.kind.value, gate.arity)] += 1
        layer = 1 + max(self._layer.get(q, 0) for q in gate.qubits)
        for q in gate.qubits:
            self._layer[q] = layer
        self._depth = max(self._depth, layer)

        for q in gate.targets:
            if gate.kind == GateKind.RESET:
                self.fresh.add(q)
            else:
                self.fresh.discard(q)
        return self

    def ensure_fresh(self, qubit: int) -> None:
        """Emit a reset unless the qubit is already known to be |0>."""
        if qubit not in self.fresh:
            self.emit(reset(qubit))

    def is_fresh(self, qubits: Sequence[int]) -> bool:
        return all(q in self.fresh for q in qubits)

    @contextmanager
    def macro(self, name: str, transition: Optional[Transition] = None):
        """Group the gates emitted inside the block into one macro-op."""
        op = MacroOp(name, transition)
        self._stack.append(op)
        try:
            yield op
        finally:
            self._stack.pop()
        if self.keep_ops:
            container = self._stack[-1].ops if self._stack else self.ops
            container.append(op)
        self.version += 1

    def gates(self) -> Iterator[GateOp]:
        """All elementary gates in order."""
        for op in self.ops:
            if isinstance(op, MacroOp):
                yield from op.gates()
            else:
                yield op

    def depth(self) -> int:
        """ASAP layer count; measurements and resets occupy layers like gates."""
        return self._depth

    def stats(self) -> CircuitStats:
        return CircuitStats(
            counts=dict(self._counts),
            depth=self._depth,
            ancilla_high_water=self.pool.high_water,
            total_qubits=self.num_qubits,
        )

    def dump(self) -> str:
        """One gate per line."""
        return "\n".join(g.dump() for g in self.gates())

    def __len__(self) -> int:
        return sum(self._counts.values())


def emit(circuit: Circuit, gate: GateOp) -> Circuit:
    """Append a gate to a circuit."""
    return circuit.emit(gate)


def depth(circuit: Circuit) -> int:
    return circuit.depth()


def stats(circuit: Circuit) -> CircuitStats:
    return circuit.stats()
