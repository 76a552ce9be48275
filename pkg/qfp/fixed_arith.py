"""
QFT-based fixed-point arithmetic.

Every primitive is emitted inside a macro-op whose transition is the exact
classical effect on a basis index, so the semantic backend can skip the
rotations. Additions are phase rotations between a QFT and its inverse on the
destination register and need no ancillae.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

from qfp.circuit import Circuit, CircuitError, Control, ControlSpec, h, phase, x
from qfp.formats import FixedFormat, FormatError

logger = logging.getLogger(__name__)

Term = Tuple[int, Tuple[Control, ...]]


@dataclass(frozen=True)
class FixedReg:
    """
    Qubits of a fixed-point register, least significant first.

    read/write translate between a full basis index and the register's bit
    pattern; contiguous layouts use a single shift and mask.
    """

    qubits: Tuple[int, ...]
    fmt: FixedFormat
    _offset: Optional[int] = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        qubits = tuple(int(q) for q in self.qubits)
        object.__setattr__(self, "qubits", qubits)
        if len(qubits) != self.fmt.n:
            raise FormatError(f"register has {len(qubits)} qubits but format needs {self.fmt.n}")
        if len(set(qubits)) != len(qubits):
            raise FormatError(f"register qubits are not distinct: {qubits}")
        if qubits == tuple(range(qubits[0], qubits[0] + len(qubits))):
            object.__setattr__(self, "_offset", qubits[0])

    @classmethod
    def of(cls, qubits: Iterable[int], signed: bool = True, f: int = 0) -> "FixedReg":
        qubits = tuple(qubits)
        return cls(qubits, FixedFormat(len(qubits), f, signed))

    @property
    def n(self) -> int:
        return self.fmt.n

    @property
    def msb(self) -> int:
        return self.qubits[-1]

    @property
    def mask(self) -> int:
        return self.fmt.modulus - 1

    def view(self, signed: Optional[bool] = None, f: Optional[int] = None) -> "FixedReg":
        """Same qubits reinterpreted in another format."""
        fmt = FixedFormat(
            self.n,
            self.fmt.f if f is None else f,
            self.fmt.signed if signed is None else signed,
        )
        return FixedReg(self.qubits, fmt)

    def read(self, index: int) -> int:
        """Raw n-bit pattern of this register inside a basis index."""
        if self._offset is not None:
            return (index >> self._offset) & self.mask
        raw = 0
        for i, q in enumerate(self.qubits):
            raw |= ((index >> q) & 1) << i
        return raw

    def code(self, index: int) -> int:
        """Signed (or unsigned) integer code held in a basis index."""
        return self.fmt.interpret(self.read(index))

    def value(self, index: int) -> float:
        return self.fmt.value(self.read(index))

    def write(self, index: int, raw: int) -> int:
        """Basis index with this register's bits replaced by `raw` mod 2^n."""
        raw &= self.mask
        if self._offset is not None:
            return (index & ~(self.mask << self._offset)) | (raw << self._offset)
        for i, q in enumerate(self.qubits):
            index = (index & ~(1 << q)) | (((raw >> i) & 1) << q)
        return index

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, item):
        return self.qubits[item]


def register(circuit: Circuit, name: str, fmt: FixedFormat) -> FixedReg:
    """Allocate a named fixed-point register on a circuit."""
    return FixedReg(tuple(circuit.add_register(name, fmt.n)), fmt)


def _controls(controls: Sequence[ControlSpec]) -> Tuple[Control, ...]:
    return tuple(Control.of(c) for c in controls)


def _control_masks(controls: Sequence[Control]) -> Tuple[int, int]:
    mask = value = 0
    for ctrl in controls:
        mask |= 1 << ctrl.qubit
        if ctrl.on_one:
            value |= 1 << ctrl.qubit
    return mask, value


def _check_disjoint(*groups: Iterable[int]) -> None:
    seen = set()
    for group in groups:
        for q in group:
            if q in seen:
                raise CircuitError(f"qubit {q} used by more than one operand")
            seen.add(q)


def qft(circuit: Circuit, reg: FixedReg) -> None:
    """
    Fourier transform without terminal swaps.

    Afterwards qubit j of the register carries the phase 2*pi*x / 2^(j+1).
    """
    q = reg.qubits
    with circuit.macro(f"qft[{reg.n}]"):
        for j in range(reg.n - 1, -1, -1):
            circuit.emit(h(q[j]))
            for k in range(j - 1, -1, -1):
                circuit.emit(phase(q[j], math.pi / (1 << (j - k)), [q[k]]))


def iqft(circuit: Circuit, reg: FixedReg) -> None:
    """Adjoint of qft()."""
    q = reg.qubits
    with circuit.macro(f"iqft[{reg.n}]"):
        for j in range(reg.n):
            for k in range(j):
                circuit.emit(phase(q[j], -math.pi / (1 << (j - k)), [q[k]]))
            circuit.emit(h(q[j]))


def _dyadic_angle(weight: int, j: int) -> float:
    """2*pi*weight / 2^(j+1) reduced to (-pi, pi]; 0 means no gate."""
    period = 1 << (j + 1)
    r = weight % period
    if r > period // 2:
        r -= period
    return 2.0 * math.pi * r / period


def _fourier_add(circuit: Circuit, dst: FixedReg, terms: Sequence[Term]) -> None:
    """Add sum(weight * [controls hold]) to dst, in dst's LSB units."""
    qft(circuit, dst)
    for j, target in enumerate(dst.qubits):
        for weight, controls in terms:
            angle = _dyadic_angle(weight, j)
            if angle != 0.0:
                circuit.emit(phase(target, angle, controls))
    iqft(circuit, dst)


def add_raw(circuit: Circuit, reg: FixedReg, raw: int, controls: Sequence[ControlSpec] = ()) -> None:
    """
    Add an integer number of LSB units to a register, modulo 2^n.

    Args:
        circuit: Circuit to emit into
        reg: Destination register
        raw: Constant in units of 2^-f (negative values subtract)
        controls: Up to two control qubits with polarity
    """
    ctrls = _controls(controls)
    if len(ctrls) > 2:
        raise CircuitError("constant addition supports at most two controls")
    _check_disjoint(reg.qubits, [c.qubit for c in ctrls])
    mask, value = _control_masks(ctrls)

    def transition(index: int) -> int:
        if (index & mask) != value:
            return index
        return reg.write(index, reg.read(index) + raw)

    with circuit.macro(f"add_const[{reg.n}]", transition):
        _fourier_add(circuit, reg, [(raw, ctrls)])


def _quantize(reg: FixedReg, c: float) -> int:
    scaled = c * (1 << reg.fmt.f)
    raw = int(round(scaled))
    if raw != scaled:
        raise FormatError(f"constant {c} is not on the 2^-{reg.fmt.f} grid")
    return raw


def add_const(circuit: Circuit, reg: FixedReg, c: float) -> None:
    """|a> -> |a + c> with two's complement wraparound."""
    add_raw(circuit, reg, _quantize(reg, c))


def c_add_const(circuit: Circuit, reg: FixedReg, c: float, ctrl: ControlSpec) -> None:
    add_raw(circuit, reg, _quantize(reg, c), [ctrl])


def cc_add_const(circuit: Circuit, reg: FixedReg, c: float, ctrls: Sequence[ControlSpec]) -> None:
    add_raw(circuit, reg, _quantize(reg, c), ctrls)


def _source_weights(src: FixedReg, shift: int) -> List[int]:
    weights = [1 << (i + shift) for i in range(src.n)]
    if src.fmt.signed:
        weights[-1] = -weights[-1]
    return weights


def add_scaled(
    circuit: Circuit,
    dst: FixedReg,
    src: FixedReg,
    shift: int = 0,
    controls: Sequence[ControlSpec] = (),
    subtract: bool = False,
) -> None:
    """
    dst += src * 2^shift (or -=), in dst's LSB units.

    A signed source is sign-extended into a wider destination through the
    negative weight of its top bit.
    """
    if shift < 0:
        raise FormatError("source offset must be non-negative")
    ctrls = _controls(controls)
    if len(ctrls) > 1:
        raise CircuitError("register addition supports at most one control")
    _check_disjoint(dst.qubits, src.qubits, [c.qubit for c in ctrls])
    mask, value = _control_masks(ctrls)
    sign = -1 if subtract else 1

    def transition(index: int) -> int:
        if (index & mask) != value:
            return index
        return dst.write(index, dst.read(index) + sign * (src.code(index) << shift))

    terms = [
        (sign * w, ctrls + (Control(q),)) for w, q in zip(_source_weights(src, shift), src.qubits)
    ]
    name = "sub_reg" if subtract else "add_reg"
    with circuit.macro(f"{name}[{dst.n}<-{src.n}]", transition):
        _fourier_add(circuit, dst, terms)


def add_reg(circuit: Circuit, dst: FixedReg, src: FixedReg, subtract: bool = False) -> None:
    """|a, b> -> |a + b, b>; subtract=True is the adjoint."""
    if dst.n != src.n or dst.fmt.f != src.fmt.f:
        raise FormatError(
            f"add_reg needs matching formats, got (n={dst.n}, f={dst.fmt.f}) and (n={src.n}, f={src.fmt.f})"
        )
    add_scaled(circuit, dst, src, subtract=subtract)


def c_add_reg(
    circuit: Circuit, dst: FixedReg, src: FixedReg, ctrl: ControlSpec, subtract: bool = False
) -> None:
    if dst.n != src.n or dst.fmt.f != src.fmt.f:
        raise FormatError("c_add_reg needs matching formats")
    add_scaled(circuit, dst, src, controls=[ctrl], subtract=subtract)


def fma(
    circuit: Circuit,
    acc: FixedReg,
    b: FixedReg,
    c: FixedReg,
    offset: int = 0,
    subtract: bool = False,
) -> None:
    """
    Fused multiply-add |a, b, c> -> |a + b*c*2^offset, b, c>, exact.

    One QFT conjugation of acc holds a doubly controlled rotation for every
    pair of operand bits.

    Raises:
        FormatError: If acc cannot hold the full product
    """
    needed = b.n + c.n - 1 + offset
    if acc.n < needed:
        raise FormatError(f"accumulator of {acc.n} qubits cannot hold a {needed}-qubit product")
    _check_disjoint(acc.qubits, b.qubits, c.qubits)
    sign = -1 if subtract else 1

    def transition(index: int) -> int:
        product = b.code(index) * c.code(index)
        return acc.write(index, acc.read(index) + sign * (product << offset))

    terms = []
    for wb, qb in zip(_source_weights(b, 0), b.qubits):
        for wc, qc in zip(_source_weights(c, 0), c.qubits):
            terms.append((sign * wb * wc * (1 << offset), (Control(qb), Control(qc))))
    with circuit.macro(f"fma[{acc.n}<-{b.n}x{c.n}]", transition):
        _fourier_add(circuit, acc, terms)


def negate(circuit: Circuit, reg: FixedReg, controls: Sequence[ControlSpec] = ()) -> None:
    """Two's complement negation: X on every qubit, then add one LSB."""
    ctrls = _controls(controls)
    if len(ctrls) > 1:
        raise CircuitError("negation supports at most one control")
    _check_disjoint(reg.qubits, [c.qubit for c in ctrls])
    mask, value = _control_masks(ctrls)

    def transition(index: int) -> int:
        if (index & mask) != value:
            return index
        return reg.write(index, -reg.read(index))

    with circuit.macro(f"negate[{reg.n}]", transition):
        for q in reg.qubits:
            circuit.emit(x(q, ctrls))
        _fourier_add(circuit, reg, [(1, ctrls)])


def c_negate(circuit: Circuit, reg: FixedReg, ctrl: ControlSpec) -> None:
    negate(circuit, reg, [ctrl])


def copy(circuit: Circuit, src: int, dst: int) -> None:
    """CX fan-out of one qubit into a fresh qubit."""
    if dst not in circuit.fresh:
        raise CircuitError(f"copy target qubit {dst} is not known to be |0>")
    src_bit, dst_bit = 1 << src, 1 << dst

    def transition(index: int) -> int:
        return index ^ dst_bit if index & src_bit else index

    with circuit.macro("copy", transition):
        circuit.emit(x(dst, [src]))
