"""
Wavefunction representations and the operations that act on them.

Basis indices are little-endian: bit k of the index is qubit k.
SparseState keeps only the non-negligible amplitudes in a dict; DenseState
holds the full numpy vector and is capped at settings.dense_max_qubits.
Both are mutated in place by the functions below, which also return the
state for chaining.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple, Union

import numpy as np

from qfp.circuit import GateKind, GateOp
from qfp.config import settings
from qfp.errors import QfpError

logger = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
NORM_TOLERANCE = 1e-10

INV_SQRT2 = 1.0 / math.sqrt(2.0)
HADAMARD = ((INV_SQRT2, INV_SQRT2), (INV_SQRT2, -INV_SQRT2))
PAULI_Y = ((0.0, -1j), (1j, 0.0))


class SimulationError(QfpError):
    """Raised when a state operation cannot be carried out."""
    pass


def mix64(value: int) -> int:
    """splitmix64 finalizer; spreads consecutive sample indices over 64 bits."""
    z = (value + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


@dataclass
class RngStream:
    """
    Counter-based random stream.

    Every draw is a pure function of (seed, counter), so a stream can be
    replayed or split across worker processes without shared state.
    """

    seed: int
    counter: int = 0

    def __post_init__(self):
        self.seed &= MASK64

    @classmethod
    def for_sample(cls, master_seed: int, index: int) -> "RngStream":
        """Independent stream for one sample of a seeded experiment."""
        return cls((master_seed & MASK64) ^ mix64(index))

    def _generator(self) -> np.random.Generator:
        gen = np.random.default_rng([self.seed, self.counter])
        self.counter += 1
        return gen

    def uniform(self) -> float:
        """Draw from [0, 1)."""
        return float(self._generator().random())

    def normal(self, mean: float = 0.0, std: float = 1.0) -> float:
        return float(self._generator().normal(mean, std))


class SparseState:
    """Basis-index to amplitude map with pruning of floating-point dust."""

    def __init__(
        self,
        num_qubits: int,
        entries: Optional[Dict[int, complex]] = None,
        prune_threshold: Optional[float] = None,
    ):
        self.num_qubits = num_qubits
        self.entries: Dict[int, complex] = dict(entries) if entries else {}
        self.prune_threshold = (
            settings.prune_threshold if prune_threshold is None else prune_threshold
        )
        limit = 1 << num_qubits
        for index in self.entries:
            if index < 0 or index >= limit:
                raise SimulationError(
                    f"basis index {index} out of range for {num_qubits} qubits"
                )

    @classmethod
    def basis(cls, num_qubits: int, index: int = 0) -> "SparseState":
        """Computational basis state |index>."""
        return cls(num_qubits, {index: 1.0 + 0j})

    def copy(self) -> "SparseState":
        return SparseState(self.num_qubits, self.entries, self.prune_threshold)

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.entries.values()))

    def normalize(self) -> "SparseState":
        norm = self.norm()
        if norm == 0.0:
            raise SimulationError("cannot normalize a zero state")
        if abs(norm - 1.0) > 0.0:
            self.entries = {i: a / norm for i, a in self.entries.items()}
        return self

    def prune(self) -> "SparseState":
        """Drop amplitudes below the threshold and renormalize."""
        threshold = self.prune_threshold
        kept = {i: a for i, a in self.entries.items() if abs(a) >= threshold}
        if len(kept) != len(self.entries):
            self.entries = kept
            self.normalize()
        return self

    def amplitude(self, index: int) -> complex:
        return self.entries.get(index, 0j)

    def probabilities(self) -> Dict[int, float]:
        return {i: abs(a) ** 2 for i, a in self.entries.items()}

    def __len__(self) -> int:
        return len(self.entries)

    def __repr__(self) -> str:
        return f"SparseState(num_qubits={self.num_qubits}, entries={len(self.entries)})"


class DenseState:
    """Full 2^n complex amplitude vector."""

    def __init__(self, num_qubits: int, amps: Optional[np.ndarray] = None, cap: Optional[int] = None):
        cap = settings.dense_max_qubits if cap is None else cap
        if num_qubits > cap:
            raise SimulationError(
                f"dense state of {num_qubits} qubits exceeds the cap of {cap}"
            )
        self.num_qubits = num_qubits
        if amps is None:
            amps = np.zeros(1 << num_qubits, dtype=np.complex128)
            amps[0] = 1.0
        amps = np.asarray(amps, dtype=np.complex128)
        if amps.shape != (1 << num_qubits,):
            raise SimulationError(
                f"amplitude vector has shape {amps.shape}, expected ({1 << num_qubits},)"
            )
        self.amps = amps

    @classmethod
    def basis(cls, num_qubits: int, index: int = 0, cap: Optional[int] = None) -> "DenseState":
        state = cls(num_qubits, cap=cap)
        state.amps[0] = 0.0
        state.amps[index] = 1.0
        return state

    def copy(self) -> "DenseState":
        return DenseState(self.num_qubits, self.amps.copy(), cap=self.num_qubits)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def normalize(self) -> "DenseState":
        norm = self.norm()
        if norm == 0.0:
            raise SimulationError("cannot normalize a zero state")
        self.amps /= norm
        return self

    def amplitude(self, index: int) -> complex:
        return complex(self.amps[index])

    def probabilities(self) -> Dict[int, float]:
        probs = np.abs(self.amps) ** 2
        nonzero = np.nonzero(probs)[0]
        return {int(i): float(probs[i]) for i in nonzero}

    def _indices(self) -> np.ndarray:
        return np.arange(1 << self.num_qubits, dtype=np.int64)

    def __repr__(self) -> str:
        return f"DenseState(num_qubits={self.num_qubits})"


State = Union[SparseState, DenseState]


def _check_gate(state: State, gate: GateOp) -> None:
    for q in gate.qubits:
        if q >= state.num_qubits:
            raise SimulationError(
                f"gate {gate.dump()} addresses qubit {q} of a {state.num_qubits}-qubit state"
            )


def _single_qubit_matrix(gate: GateOp) -> Tuple[Tuple[complex, complex], Tuple[complex, complex]]:
    if gate.kind == GateKind.X:
        return ((0, 1), (1, 0))
    if gate.kind == GateKind.Y:
        return PAULI_Y
    if gate.kind == GateKind.Z:
        return ((1, 0), (0, -1))
    if gate.kind == GateKind.H:
        return HADAMARD
    if gate.kind == GateKind.PHASE:
        return ((1, 0), (0, complex(math.cos(gate.angle), math.sin(gate.angle))))
    raise SimulationError(f"{gate.kind.value} is not a single-qubit unitary")


def _apply_sparse(state: SparseState, gate: GateOp) -> SparseState:
    ctrl_mask, ctrl_value = gate.control_masks()
    entries = state.entries

    if gate.kind == GateKind.SWAP:
        bit_a = 1 << gate.targets[0]
        bit_b = 1 << gate.targets[1]
        out = {}
        for index, amp in entries.items():
            if (index & ctrl_mask) == ctrl_value and bool(index & bit_a) != bool(index & bit_b):
                index ^= bit_a | bit_b
            out[index] = amp
        state.entries = out
        return state

    bit = 1 << gate.targets[0]
    if gate.kind == GateKind.X:
        state.entries = {
            (i ^ bit if (i & ctrl_mask) == ctrl_value else i): a for i, a in entries.items()
        }
        return state
    if gate.kind in (GateKind.Z, GateKind.PHASE):
        factor = -1.0 if gate.kind == GateKind.Z else complex(math.cos(gate.angle), math.sin(gate.angle))
        for index in entries:
            if (index & ctrl_mask) == ctrl_value and index & bit:
                entries[index] *= factor
        return state

    matrix = _single_qubit_matrix(gate)
    out: Dict[int, complex] = {}
    for index, amp in entries.items():
        if (index & ctrl_mask) != ctrl_value:
            out[index] = out.get(index, 0j) + amp
            continue
        col = 1 if index & bit else 0
        base = index & ~bit
        for row, target in ((0, base), (1, base | bit)):
            coeff = matrix[row][col]
            if coeff != 0:
                out[target] = out.get(target, 0j) + coeff * amp
    state.entries = out
    return state.prune()


def _apply_dense(state: DenseState, gate: GateOp) -> DenseState:
    ctrl_mask, ctrl_value = gate.control_masks()
    idx = state._indices()
    amps = state.amps

    if gate.kind == GateKind.SWAP:
        bit_a = 1 << gate.targets[0]
        bit_b = 1 << gate.targets[1]
        sel = ((idx & (ctrl_mask | bit_a | bit_b)) == (ctrl_value | bit_a))
        i = idx[sel]
        j = i ^ (bit_a | bit_b)
        amps[i], amps[j] = amps[j].copy(), amps[i].copy()
        return state

    bit = 1 << gate.targets[0]
    matrix = _single_qubit_matrix(gate)
    sel = (idx & (ctrl_mask | bit)) == ctrl_value
    i0 = idx[sel]
    i1 = i0 | bit
    a0 = amps[i0].copy()
    a1 = amps[i1].copy()
    amps[i0] = matrix[0][0] * a0 + matrix[0][1] * a1
    amps[i1] = matrix[1][0] * a0 + matrix[1][1] * a1
    return state


def apply_gate(state: State, gate: GateOp) -> State:
    """
    Multiply the state by a unitary gate, in place.

    Args:
        state: Sparse or dense wavefunction
        gate: Any unitary GateOp; MEASURE and RESET go through
            measure_qubit() and reset_ancilla()

    Returns:
        The same state object

    Raises:
        SimulationError: If a qubit is out of range or the gate is not unitary
    """
    _check_gate(state, gate)
    if gate.kind in (GateKind.MEASURE, GateKind.RESET):
        raise SimulationError(f"{gate.kind.value} needs a random stream; use measure_qubit/reset_ancilla")
    if isinstance(state, DenseState):
        return _apply_dense(state, gate)
    return _apply_sparse(state, gate)


def probability_of_one(state: State, qubit: int) -> float:
    bit = 1 << qubit
    if isinstance(state, DenseState):
        idx = state._indices()
        return float(np.sum(np.abs(state.amps[(idx & bit) != 0]) ** 2))
    return sum(abs(a) ** 2 for i, a in state.entries.items() if i & bit)


def measure_qubit(state: State, qubit: int, rng: RngStream) -> Tuple[int, State]:
    """
    Projective Z measurement of one qubit.

    Outcome 0 is chosen when the uniform draw falls below P(0).
    """
    if qubit >= state.num_qubits:
        raise SimulationError(f"qubit {qubit} out of range for {state.num_qubits} qubits")
    p1 = min(max(probability_of_one(state, qubit), 0.0), 1.0)
    outcome = 0 if rng.uniform() < 1.0 - p1 else 1
    branch = p1 if outcome else 1.0 - p1
    if branch <= 0.0:
        raise SimulationError(f"measured a zero-probability branch on qubit {qubit}")

    bit = 1 << qubit
    if isinstance(state, DenseState):
        idx = state._indices()
        wrong = ((idx & bit) != 0) != bool(outcome)
        state.amps[wrong] = 0.0
        state.normalize()
    else:
        state.entries = {
            i: a for i, a in state.entries.items() if bool(i & bit) == bool(outcome)
        }
        state.normalize()
    return outcome, state


def reset_ancilla(
    state: State, qubit: int, rng: RngStream, outcomes: Optional[List[int]] = None
) -> State:
    """
    Return a qubit to |0> without disturbing the rest of the register.

    Hadamard, measure, then X on outcome 1. Magnitudes of the remaining
    components are preserved; components whose ancilla held 1 pick up a
    sign of (-1)^outcome.

    Args:
        state: Wavefunction
        qubit: Ancilla to reset
        rng: Stream supplying the measurement draw
        outcomes: If given, the measured bit is appended so the signs can be
            reconstructed later
    """
    apply_gate(state, GateOp(GateKind.H, (qubit,)))
    outcome, state = measure_qubit(state, qubit, rng)
    if outcome:
        apply_gate(state, GateOp(GateKind.X, (qubit,)))
    if outcomes is not None:
        outcomes.append(outcome)
    logger.debug(f"Reset qubit {qubit}, outcome {outcome}")
    return state


def to_dense(state: SparseState, cap: Optional[int] = None) -> DenseState:
    """Expand a sparse state into a full vector."""
    dense = DenseState(state.num_qubits, cap=cap)
    dense.amps[0] = 0.0
    for index, amp in state.entries.items():
        dense.amps[index] = amp
    return dense


def to_sparse(state: DenseState, prune_threshold: float = 0.0) -> SparseState:
    """Collect the non-zero amplitudes of a dense vector."""
    nonzero = np.nonzero(np.abs(state.amps) > prune_threshold)[0]
    entries = {int(i): complex(state.amps[i]) for i in nonzero}
    return SparseState(state.num_qubits, entries)


def as_dict(state: State) -> Dict[int, complex]:
    """Non-zero amplitudes as a plain dict regardless of representation."""
    if isinstance(state, DenseState):
        return to_sparse(state).entries
    return dict(state.entries)


def fix_global_phase(amplitudes: Dict[int, complex]) -> Dict[int, complex]:
    """Rotate so the largest-magnitude amplitude (lowest index on ties) is real positive."""
    if not amplitudes:
        return {}
    pivot = max(sorted(amplitudes), key=lambda i: abs(amplitudes[i]))
    anchor = amplitudes[pivot]
    rotation = abs(anchor) / anchor
    return {i: a * rotation for i, a in amplitudes.items()}


def states_close(a: State, b: State, tol: float = NORM_TOLERANCE, up_to_phase: bool = True) -> bool:
    """Amplitude-wise comparison, optionally modulo global phase."""
    left, right = as_dict(a), as_dict(b)
    if up_to_phase:
        left, right = fix_global_phase(left), fix_global_phase(right)
    for index in set(left) | set(right):
        if abs(left.get(index, 0j) - right.get(index, 0j)) > tol:
            return False
    return True


def marginal(state: State, drop: Iterable[int]) -> Dict[int, float]:
    """
    Probability distribution over basis patterns with some qubits traced out.

    The dropped qubits are cleared from each index before summing.
    """
    mask = 0
    for q in drop:
        mask |= 1 << q
    dist: Dict[int, float] = {}
    for index, prob in state.probabilities().items():
        key = index & ~mask
        dist[key] = dist.get(key, 0.0) + prob
    return dist
