"""
Floating-point circuits on two's complement (exponent, mantissa) registers.

Operations allocate scratch qubits from the circuit's ancilla pool and reset
them before returning, so the live-ancilla count is back to zero after every
top-level call. Each operation is a macro-op whose transition is the matching
integer kernel from qfp.oracle.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

from qfp.circuit import Circuit, CircuitError, swap, x
from qfp.config import settings
from qfp.fixed_arith import (
    FixedReg,
    add_raw,
    add_scaled,
    copy,
    fma,
    negate,
)
from qfp.formats import FloatFormat, FormatError
from qfp.oracle import (
    SoftFloat,
    add_codes,
    horner_coefficients,
    mul_codes,
    o_encode,
    shift_bits,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FloatReg:
    """Exponent and mantissa registers of one float value."""

    exp: FixedReg
    mant: FixedReg
    fmt: FloatFormat

    def __post_init__(self):
        if self.exp.n != self.fmt.e or self.mant.n != self.fmt.m:
            raise FormatError(f"register widths ({self.exp.n}, {self.mant.n}) do not match {self.fmt}")

    @property
    def qubits(self) -> Tuple[int, ...]:
        return self.mant.qubits + self.exp.qubits

    def codes(self, index: int) -> Tuple[int, int]:
        """(exponent code, mantissa code) held in a basis index."""
        return self.exp.code(index), self.mant.code(index)

    def read(self, index: int) -> SoftFloat:
        exp_code, mant_code = self.codes(index)
        return SoftFloat(exp_code, mant_code, self.fmt)

    def write(self, index: int, value: SoftFloat) -> int:
        """Basis index with this register set to a code pair."""
        index = self.exp.write(index, value.exp_code)
        return self.mant.write(index, value.mant_code)

    def value(self, index: int) -> float:
        return self.read(index).value


def float_register(circuit: Circuit, name: str, fmt: FloatFormat) -> FloatReg:
    """Allocate mantissa then exponent qubits under `name.m` / `name.e`."""
    mant = FixedReg(tuple(circuit.add_register(f"{name}.m", fmt.m)), fmt.mant_fmt)
    exp = FixedReg(tuple(circuit.add_register(f"{name}.e", fmt.e)), fmt.exp_fmt)
    return FloatReg(exp, mant, fmt)


def reset_register(circuit: Circuit, reg: FloatReg) -> None:
    """Return a work register to |0> with the ancilla-reset protocol."""
    with circuit.macro("reset"):
        for q in reg.qubits:
            circuit.ensure_fresh(q)


def _require_fresh(circuit: Circuit, reg: FloatReg, op: str) -> None:
    if not circuit.is_fresh(reg.qubits):
        raise CircuitError(f"{op} output register is not known to be |0>")


def _clear_bit(circuit: Circuit, target: int, scratch: int, ctrl: int) -> None:
    """Zero `target` where `ctrl` is set; the old bit is left in `scratch`."""
    circuit.ensure_fresh(scratch)
    circuit.emit(x(scratch, [target]))
    circuit.emit(x(target, [scratch, ctrl]))


def shift(circuit: Circuit, q: FixedReg, s: FixedReg) -> None:
    """
    In-place shift of q by the signed amount held in s (positive = right).

    Each power of two of the amount drives one controlled-swap cascade;
    positions rotated around the end are cleared through a scratch qubit.
    Signed right shifts then refill the vacated high positions from a copy
    of the sign bit.
    """
    n, width = q.n, s.n
    signed = q.fmt.signed
    pool = circuit.pool

    def transition(index: int) -> int:
        return q.write(index, shift_bits(q.read(index), n, s.code(index), signed))

    with circuit.macro(f"shift[{n}]", transition):
        ancillae = pool.allocate(4 if signed else 3)
        a0, a1, a2 = ancillae[:3]
        if signed:
            sign = ancillae[3]
            copy(circuit, q.msb, sign)

        # Right shifts, amount >= 0
        for k in range(width - 1):
            d = 1 << k
            circuit.ensure_fresh(a1)
            circuit.emit(x(a1, [s[k], (s[width - 1], False)]))
            for pos in range(n - d):
                circuit.emit(swap(q[pos], q[pos + d], [a1]))
            for pos in range(max(n - d, 0), n):
                _clear_bit(circuit, q[pos], a0, a1)
                if signed:
                    circuit.emit(x(q[pos], [a1, sign]))

        # Left shifts by |amount| for amount < 0
        circuit.ensure_fresh(a2)
        circuit.emit(x(a2, [s[width - 1]]))
        negate(circuit, s)
        for k in range(width):
            d = 1 << k
            circuit.ensure_fresh(a1)
            circuit.emit(x(a1, [s[k], a2]))
            for pos in range(n - 1, d - 1, -1):
                circuit.emit(swap(q[pos], q[pos - d], [a1]))
            for pos in range(min(d, n)):
                _clear_bit(circuit, q[pos], a0, a1)
        negate(circuit, s)
        pool.release(ancillae)


def zero_exp(circuit: Circuit, reg: FloatReg) -> None:
    """Set the exponent to 0 wherever the mantissa is 0."""
    pool = circuit.pool

    def transition(index: int) -> int:
        if reg.mant.read(index) == 0:
            return reg.exp.write(index, 0)
        return index

    with circuit.macro("zero_exp", transition):
        nonzero, scratch = pool.allocate(2)
        for q in reversed(reg.mant.qubits):
            circuit.ensure_fresh(scratch)
            circuit.emit(x(scratch, [q, (nonzero, False)]))
            circuit.emit(x(nonzero, [scratch]))
        for q in reg.exp.qubits:
            circuit.ensure_fresh(scratch)
            circuit.emit(x(scratch, [q, (nonzero, False)]))
            circuit.emit(x(q, [scratch]))
        pool.release([nonzero, scratch])


def _underflow_to_zero(circuit: Circuit, wide_exp: FixedReg, mant: FixedReg) -> None:
    """Clear the mantissa when an (e+1)-bit exponent is below the e-bit range."""
    pool = circuit.pool
    flag, scratch = pool.allocate(2)
    circuit.emit(x(flag, [wide_exp[-1], (wide_exp[-2], False)]))
    for q in mant.qubits:
        _clear_bit(circuit, q, scratch, flag)
    pool.release([flag, scratch])


def _write_codes(out: FloatReg, index: int, codes: Tuple[int, int]) -> int:
    index = out.exp.write(index, codes[0])
    return out.mant.write(index, codes[1])


def fmul(circuit: Circuit, q: FloatReg, r: FloatReg, out: FloatReg) -> None:
    """
    out = q * r, out-of-place.

    The full mantissa product is accumulated exactly, reduced to its
    magnitude, truncated to m + 1 bits and renormalized by a one-bit left
    shift when below 0.5. Exponents are summed with one extension qubit so
    underflow can be detected and flushed to zero.

    Raises:
        CircuitError: If out is not fresh
    """
    fmt = q.fmt
    m = fmt.m
    _require_fresh(circuit, out, "fmul")
    pool = circuit.pool

    def transition(index: int) -> int:
        codes = mul_codes(fmt, *q.codes(index), *r.codes(index))
        return _write_codes(out, index, codes)

    with circuit.macro(f"fmul{fmt}", transition):
        low = pool.allocate(m - 1)
        acc = FixedReg.of(low + list(out.mant.qubits), signed=True, f=2 * m - 2)
        fma(circuit, acc, q.mant, r.mant)

        [sign] = pool.allocate(1)
        copy(circuit, acc.msb, sign)
        negate(circuit, acc, [sign])

        # Truncate to m + 1 bits: the top mantissa bits plus one guard bit
        pool.release(low[: m - 2])
        guard = low[m - 2]
        work = FixedReg.of([guard] + list(out.mant.qubits), signed=False)

        [norm] = pool.allocate(1)
        circuit.emit(x(norm, [(out.mant[m - 2], False)]))
        shift(circuit, work, FixedReg.of([norm], signed=True))
        pool.release([guard])

        [ext] = pool.allocate(1)
        wide_exp = FixedReg.of(out.exp.qubits + (ext,), signed=True)
        add_scaled(circuit, wide_exp, q.exp)
        add_scaled(circuit, wide_exp, r.exp)
        add_raw(circuit, wide_exp, -1, [norm])
        pool.release([norm])

        negate(circuit, out.mant, [sign])
        pool.release([sign])

        _underflow_to_zero(circuit, wide_exp, out.mant)
        pool.release([ext])
        zero_exp(circuit, out)


def fadd(circuit: Circuit, q: FloatReg, r: FloatReg, out: FloatReg) -> None:
    """
    out = q + r, out-of-place.

    The operand with the larger exponent is selected (a zero operand never
    wins), the other is aligned with one guard position, the mantissas are
    added, and a leading-zero counter drives the renormalizing shift and the
    exponent fix-up.

    Raises:
        FormatError: If m > 2^(e-1); the counter would not fit
        CircuitError: If out is not fresh
    """
    fmt = q.fmt
    m = fmt.m
    if m > 1 << (fmt.e - 1):
        raise FormatError(f"fadd needs m <= 2^(e-1), got {fmt}")
    _require_fresh(circuit, out, "fadd")
    pool = circuit.pool

    def transition(index: int) -> int:
        codes = add_codes(fmt, *q.codes(index), *r.codes(index))
        return _write_codes(out, index, codes)

    with circuit.macro(f"fadd{fmt}", transition):
        [ext] = pool.allocate(1)
        diff = FixedReg.of(out.exp.qubits + (ext,), signed=True)
        add_scaled(circuit, diff, q.exp)
        add_scaled(circuit, diff, r.exp, subtract=True)

        # Zero flags: canonical mantissas have one of their top two bits set
        zq, zr = pool.allocate(2)
        circuit.emit(x(zq, [(q.mant[m - 1], False), (q.mant[m - 2], False)]))
        circuit.emit(x(zr, [(r.mant[m - 1], False), (r.mant[m - 2], False)]))
        [sel] = pool.allocate(1)
        circuit.emit(x(sel, [ext, (zr, False)]))
        circuit.emit(x(sel, [zq, (ext, False)]))
        pool.release([zq, zr])

        # sel = 1: r is the larger operand, q is aligned
        guard, high = pool.allocate(2)
        work = FixedReg.of((guard,) + out.mant.qubits + (high,), signed=True, f=m)
        for k in range(m):
            circuit.emit(x(out.mant[k], [sel, q.mant[k]]))
            circuit.emit(x(out.mant[k], [(sel, False), r.mant[k]]))
        circuit.emit(x(high, [out.mant.msb]))

        [dsign] = pool.allocate(1)
        copy(circuit, ext, dsign)
        negate(circuit, diff, [dsign])
        pool.release([dsign])

        shift(circuit, work, diff)
        add_scaled(circuit, work, q.mant, shift=1, controls=[(sel, False)])
        add_scaled(circuit, work, r.mant, shift=1, controls=[(sel, True)])

        [neg] = pool.allocate(1)
        copy(circuit, high, neg)
        negate(circuit, work, [neg])

        # Leading-zero counter in the exponent qubits, starting at 1
        for qubit in diff.qubits:
            circuit.ensure_fresh(qubit)
        circuit.emit(x(diff[0]))
        found, scratch = pool.allocate(2)
        for k in range(m, -1, -1):
            add_raw(circuit, diff, -1, [(work[k], False), (found, False)])
            circuit.ensure_fresh(scratch)
            circuit.emit(x(scratch, [found]))
            circuit.emit(x(found, [work[k], (scratch, False)]))
        pool.release([found, scratch])

        shift(circuit, work.view(signed=False), diff)
        add_scaled(circuit, diff, q.exp, controls=[(sel, False)])
        add_scaled(circuit, diff, r.exp, controls=[(sel, True)])
        pool.release([guard, high, sel])

        negate(circuit, out.mant, [neg])
        pool.release([neg])

        _underflow_to_zero(circuit, diff, out.mant)
        pool.release([ext])
        zero_exp(circuit, out)


def fneg(circuit: Circuit, q: FloatReg) -> None:
    """Negate the mantissa in place; the exponent is unchanged."""
    negate(circuit, q.mant)


def load_const(circuit: Circuit, reg: FloatReg, value: float, mode: str = "nearest") -> SoftFloat:
    """
    Write a classical constant into a fresh register with X gates.

    Returns:
        The code that was loaded
    """
    _require_fresh(circuit, reg, "load_const")
    code = o_encode(value, reg.fmt, mode)
    pattern = reg.write(0, code)

    def transition(index: int) -> int:
        return index ^ pattern

    with circuit.macro(f"load_const[{value!r}]", transition):
        for q in reg.qubits:
            if pattern >> q & 1:
                circuit.emit(x(q))
    return code


def _recip_guess(circuit: Circuit, q: FloatReg, guess: FloatReg) -> None:
    """guess = sign(q) * 0.5 * 2^(1 - q.exp)."""
    fmt = q.fmt
    m = fmt.m

    def transition(index: int) -> int:
        exp_code, mant_code = q.codes(index)
        index = guess.exp.write(index, 1 - exp_code)
        return guess.mant.write(index, -fmt.half if mant_code < 0 else fmt.half)

    with circuit.macro("recip_guess", transition):
        circuit.emit(x(guess.mant[m - 2]))
        circuit.emit(x(guess.mant.msb, [q.mant.msb]))
        for src, dst in zip(q.exp.qubits, guess.exp.qubits):
            circuit.emit(x(dst, [src]))
        for dst in guess.exp.qubits:
            circuit.emit(x(dst))
        add_raw(circuit, guess.exp, 2)


def recip(circuit: Circuit, q: FloatReg, iterations: Optional[int] = None, name: str = "recip") -> FloatReg:
    """
    Newton reciprocal x <- x * (2 - q * x).

    Work registers are reset between iterations and swap roles, so the
    register count does not grow with the iteration count.

    Returns:
        The register holding the result
    """
    iterations = settings.newton_iterations if iterations is None else iterations
    fmt = q.fmt
    xr = float_register(circuit, f"{name}.x", fmt)
    tr = float_register(circuit, f"{name}.t", fmt)
    ur = float_register(circuit, f"{name}.u", fmt)
    two = float_register(circuit, f"{name}.two", fmt)
    load_const(circuit, two, 2.0)
    _recip_guess(circuit, q, xr)

    for i in range(iterations):
        with circuit.macro(f"newton[{i}]"):
            fmul(circuit, q, xr, tr)
            fneg(circuit, tr)
            fadd(circuit, two, tr, ur)
            reset_register(circuit, tr)
            fmul(circuit, xr, ur, tr)
            reset_register(circuit, xr)
            reset_register(circuit, ur)
        xr, tr = tr, xr
    logger.debug(f"Built reciprocal {fmt} with {iterations} iterations: {len(circuit)} gates")
    return xr


def fexp(circuit: Circuit, q: FloatReg, order: Optional[int] = None, name: str = "exp") -> FloatReg:
    """
    exp(q) by Horner's rule on the order-N Taylor polynomial.

    h = 1 + q/N, then h = 1 + (q/k) * h for k = N-1 .. 1. Accurate for
    |q| <= 1.
    """
    order = settings.horner_order if order is None else order
    if order < 1:
        raise FormatError("Horner order must be at least 1")
    fmt = q.fmt
    coefficients = horner_coefficients(fmt, order)
    one = float_register(circuit, f"{name}.one", fmt)
    coef = float_register(circuit, f"{name}.coef", fmt)
    p = float_register(circuit, f"{name}.p", fmt)
    w = float_register(circuit, f"{name}.w", fmt)
    h = float_register(circuit, f"{name}.h", fmt)
    h_next = float_register(circuit, f"{name}.h2", fmt)
    load_const(circuit, one, 1.0)

    load_const(circuit, coef, coefficients[order - 1].value)
    fmul(circuit, q, coef, p)
    fadd(circuit, one, p, h)
    reset_register(circuit, coef)
    reset_register(circuit, p)

    for k in range(order - 1, 0, -1):
        with circuit.macro(f"horner[{k}]"):
            load_const(circuit, coef, coefficients[k - 1].value)
            fmul(circuit, q, coef, p)
            fmul(circuit, p, h, w)
            fadd(circuit, one, w, h_next)
            for reg in (coef, p, w, h):
                reset_register(circuit, reg)
        h, h_next = h_next, h
    return h


def canonical_violations(reg: FloatReg, indices: List[int]) -> List[int]:
    """Basis indices whose register content is not canonical."""
    return [i for i in indices if not reg.read(i).is_canonical()]
