"""
Classical bit-exact model of the float encoding and circuits.

The integer kernels (shift_bits, mul_codes, add_codes, ...) reproduce what the
circuits in float_arith do to a basis state, including truncation, the single
guard position, underflow-to-zero and two's complement wrap. They double as
the classical transitions of the float macro-ops. SoftFloat wraps a code pair
and carries a RangeStatus describing whether the ideal real result fits the
format.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterator, List, Tuple

import numpy as np

from qfp.errors import QfpError
from qfp.formats import FixedFormat, FloatFormat, FormatError

logger = logging.getLogger(__name__)

MAX_ENUMERATION_WIDTH = 14


class EncodingError(QfpError):
    """Raised when a real value has no code in the requested format."""
    pass


class EncodingOverflowError(EncodingError):
    """Magnitude above the largest representable value."""
    pass


class EncodingUnderflowError(EncodingError):
    """Non-zero magnitude below the smallest normalized value."""
    pass


class RangeStatus(str, Enum):
    OK = "ok"
    OVERFLOW = "overflow"
    UNDERFLOW = "underflow"
    UNREPRESENTABLE = "unrepresentable"
    INVALID = "invalid"


@dataclass(frozen=True)
class SoftFloat:
    """Exponent and mantissa codes of one value in an (e, m) format."""

    exp_code: int
    mant_code: int
    fmt: FloatFormat
    status: RangeStatus = field(default=RangeStatus.OK, compare=False)

    @classmethod
    def zero(cls, fmt: FloatFormat) -> "SoftFloat":
        return cls(0, 0, fmt)

    @classmethod
    def from_raw(cls, fmt: FloatFormat, exp_raw: int, mant_raw: int,
                 status: RangeStatus = RangeStatus.OK) -> "SoftFloat":
        """Build from register bit patterns."""
        return cls(fmt.exp_fmt.interpret(exp_raw), fmt.mant_fmt.interpret(mant_raw), fmt, status)

    @property
    def exp_raw(self) -> int:
        return self.exp_code & ((1 << self.fmt.e) - 1)

    @property
    def mant_raw(self) -> int:
        return self.mant_code & ((1 << self.fmt.m) - 1)

    @property
    def value(self) -> float:
        return decode(self)

    @property
    def is_zero(self) -> bool:
        return self.mant_code == 0

    @property
    def ok(self) -> bool:
        return self.status == RangeStatus.OK

    def is_canonical(self) -> bool:
        """Normalized mantissa (|m| in [0.5, 1)) or the unique zero."""
        if self.mant_code == 0:
            return self.exp_code == 0
        fmt = self.fmt
        if not fmt.min_exp <= self.exp_code <= fmt.max_exp:
            return False
        return fmt.half <= abs(self.mant_code) < 2 * fmt.half

    def ulp(self) -> float:
        """Weight of the mantissa LSB at this exponent."""
        return 2.0 ** (self.exp_code - (self.fmt.m - 1))

    def __str__(self) -> str:
        return f"SoftFloat(exp={self.exp_code}, mant={self.mant_code}, value={self.value!r})"


def decode(x: SoftFloat) -> float:
    return math.ldexp(x.mant_code, x.exp_code - (x.fmt.m - 1))


def classify(value: float, fmt: FloatFormat) -> RangeStatus:
    """Whether an ideal real result has an exponent inside the format."""
    if value == 0.0:
        return RangeStatus.OK
    if not math.isfinite(value):
        return RangeStatus.UNREPRESENTABLE
    _, exponent = math.frexp(value)
    if exponent > fmt.max_exp:
        return RangeStatus.OVERFLOW
    if exponent < fmt.min_exp:
        return RangeStatus.UNDERFLOW
    return RangeStatus.OK


def o_encode(x: float, fmt: FloatFormat, mode: str = "nearest") -> SoftFloat:
    """
    Canonical code of a real value.

    Args:
        x: Value to encode
        fmt: Target format
        mode: "nearest" (ties to even) or "truncate" (toward zero, as the
            circuits discard bits)

    Raises:
        EncodingOverflowError: If |x| exceeds the largest value
        EncodingUnderflowError: If 0 < |x| is below the smallest normalized value
    """
    if mode not in ("nearest", "truncate"):
        raise ValueError(f"unknown rounding mode {mode!r}")
    if not math.isfinite(x):
        raise EncodingOverflowError(f"cannot encode {x} in {fmt}")
    if x == 0.0:
        return SoftFloat.zero(fmt)

    fraction, exponent = math.frexp(x)
    scaled = fraction * (1 << (fmt.m - 1))
    mant = round(scaled) if mode == "nearest" else math.trunc(scaled)
    if abs(mant) == 2 * fmt.half:
        mant //= 2
        exponent += 1

    if exponent > fmt.max_exp:
        raise EncodingOverflowError(f"{x} overflows {fmt}: exponent {exponent} > {fmt.max_exp}")
    if exponent < fmt.min_exp:
        raise EncodingUnderflowError(f"{x} underflows {fmt}: exponent {exponent} < {fmt.min_exp}")
    return SoftFloat(exponent, mant, fmt)


def o_fixed_encode(x: float, fmt: FixedFormat, mode: str = "nearest") -> int:
    """Integer code of x on the 2^-f grid; out-of-range values raise."""
    scaled = x * (1 << fmt.f)
    code = round(scaled) if mode == "nearest" else math.trunc(scaled)
    if code > fmt.max_code:
        raise EncodingOverflowError(f"{x} overflows fixed ({fmt.n}, {fmt.f})")
    if code < fmt.min_code:
        raise EncodingOverflowError(f"{x} overflows fixed ({fmt.n}, {fmt.f})")
    if code == 0 and x != 0.0:
        raise EncodingUnderflowError(f"{x} rounds to zero in fixed ({fmt.n}, {fmt.f})")
    return code


def o_fixed_decode(code: int, fmt: FixedFormat) -> float:
    return fmt.value(code)


# Integer kernels shared with the circuit transitions


def shift_bits(raw: int, n: int, amount: int, signed: bool) -> int:
    """
    Shift an n-bit pattern right by `amount` (left when negative).

    Signed right shifts fill the vacated high bits with the sign bit, so they
    round toward minus infinity. Left shifts and unsigned right shifts fill
    with 0.
    """
    mask = (1 << n) - 1
    raw &= mask
    if amount < 0:
        return (raw << -amount) & mask
    if signed and (raw >> (n - 1)) & 1:
        return ((raw - (1 << n)) >> amount) & mask
    return raw >> amount


def zero_exp_codes(exp_code: int, mant_code: int) -> Tuple[int, int]:
    """Clear the exponent of a zero mantissa."""
    return (0 if mant_code == 0 else exp_code), mant_code


def _fix_underflow(fmt: FloatFormat, exp_wide: int, mant_raw: int) -> Tuple[int, int]:
    """Narrow an (e+1)-bit exponent; negative out-of-range results become zero."""
    ext = (exp_wide >> fmt.e) & 1
    top = (exp_wide >> (fmt.e - 1)) & 1
    if ext and not top:
        mant_raw = 0
    exp_code = fmt.exp_fmt.interpret(exp_wide)
    mant_code = fmt.mant_fmt.interpret(mant_raw)
    return zero_exp_codes(exp_code, mant_code)


def mul_codes(fmt: FloatFormat, qe: int, qm: int, re: int, rm: int) -> Tuple[int, int]:
    """Exponent and mantissa codes produced by the multiplication circuit."""
    m, e = fmt.m, fmt.e
    wide = 2 * m - 1
    raw = (qm * rm) & ((1 << wide) - 1)
    sign = (raw >> (wide - 1)) & 1
    mag = -raw & ((1 << wide) - 1) if sign else raw

    work_mask = (1 << (m + 1)) - 1
    work = (mag >> (m - 2)) & work_mask
    norm = 1 - ((work >> (m - 1)) & 1)
    if norm:
        work = (work << 1) & work_mask
    mant = work >> 1
    if sign:
        mant = -mant & ((1 << m) - 1)

    exp_wide = (qe + re - norm) & ((1 << (e + 1)) - 1)
    return _fix_underflow(fmt, exp_wide, mant)


def add_codes(fmt: FloatFormat, qe: int, qm: int, re: int, rm: int) -> Tuple[int, int]:
    """Exponent and mantissa codes produced by the addition circuit."""
    m, e = fmt.m, fmt.e
    exp_fmt = FixedFormat(e + 1, 0, True)
    diff = exp_fmt.interpret(qe - re)
    ext = diff < 0

    top2 = (1 << (m - 1)) | (1 << (m - 2))
    zq = (qm & top2) == 0
    zr = (rm & top2) == 0
    sel = (ext and not zr) != (zq and not ext)
    small, large, large_exp = (qm, rm, re) if sel else (rm, qm, qe)

    n = m + 2
    mask = (1 << n) - 1
    work = shift_bits(small * 2, n, abs(diff), signed=True)
    work = (work + large * 2) & mask
    neg = (work >> (n - 1)) & 1
    if neg:
        work = -work & mask

    counter = 1
    found = False
    for k in range(m, -1, -1):
        bit = (work >> k) & 1
        if not bit and not found:
            counter -= 1
        if bit:
            found = True
    work = shift_bits(work, n, counter, signed=False)

    mant = (work >> 1) & ((1 << m) - 1)
    if neg:
        mant = -mant & ((1 << m) - 1)
    exp_wide = (counter + large_exp) & ((1 << (e + 1)) - 1)
    return _fix_underflow(fmt, exp_wide, mant)


def _merge_status(*values: SoftFloat) -> RangeStatus:
    for value in values:
        if value.status != RangeStatus.OK:
            return value.status
        if not value.is_canonical():
            return RangeStatus.INVALID
    return RangeStatus.OK


def _result(fmt: FloatFormat, codes: Tuple[int, int], ideal: float, *inputs: SoftFloat) -> SoftFloat:
    status = _merge_status(*inputs)
    if status == RangeStatus.OK:
        status = classify(ideal, fmt)
    return SoftFloat(codes[0], codes[1], fmt, status)


def o_mul(a: SoftFloat, b: SoftFloat) -> SoftFloat:
    codes = mul_codes(a.fmt, a.exp_code, a.mant_code, b.exp_code, b.mant_code)
    return _result(a.fmt, codes, a.value * b.value, a, b)


def o_add(a: SoftFloat, b: SoftFloat) -> SoftFloat:
    if a.fmt.m > 1 << (a.fmt.e - 1):
        raise FormatError(f"addition needs m <= 2^(e-1), got {a.fmt}")
    codes = add_codes(a.fmt, a.exp_code, a.mant_code, b.exp_code, b.mant_code)
    return _result(a.fmt, codes, a.value + b.value, a, b)


def o_neg(a: SoftFloat) -> SoftFloat:
    """Mantissa negation; the code for -1 has no positive partner and is flagged."""
    fmt = a.fmt
    mant = fmt.mant_fmt.interpret(-a.mant_code)
    status = _merge_status(a)
    if a.mant_code == -2 * fmt.half:
        status = RangeStatus.INVALID
    return SoftFloat(a.exp_code, mant, fmt, status)


def o_shift(code: int, fmt: FixedFormat, amount: int) -> int:
    """Fixed-point register after a shift by `amount` (positive = right)."""
    return fmt.interpret(shift_bits(code, fmt.n, amount, fmt.signed))


def o_zeroexp(a: SoftFloat) -> SoftFloat:
    exp_code, mant_code = zero_exp_codes(a.exp_code, a.mant_code)
    return replace(a, exp_code=exp_code, mant_code=mant_code)


def recip_guess(a: SoftFloat) -> SoftFloat:
    """sign(a) * 0.5 * 2^(1 - exp), the Newton starting point."""
    fmt = a.fmt
    mant = -fmt.half if a.mant_code < 0 else fmt.half
    return SoftFloat.from_raw(fmt, 1 - a.exp_code, mant)


def o_recip(a: SoftFloat, iterations: int = 10) -> SoftFloat:
    """
    Newton reciprocal x <- x * (2 - a * x) in circuit arithmetic.

    Zero or an out-of-range reciprocal marks the result unrepresentable.
    """
    fmt = a.fmt
    two = o_encode(2.0, fmt)
    x = recip_guess(a)
    for _ in range(iterations):
        t = o_neg(o_mul(a, x))
        u = o_add(two, t)
        x = o_mul(x, u)
    status = _merge_status(a)
    if status == RangeStatus.OK:
        if a.is_zero or classify(1.0 / a.value, fmt) != RangeStatus.OK:
            status = RangeStatus.UNREPRESENTABLE
        elif x.status != RangeStatus.OK:
            status = x.status
    return replace(x, status=status)


def horner_coefficients(fmt: FloatFormat, order: int) -> List[SoftFloat]:
    """Codes of 1/k for k = 1..order, rounded to nearest."""
    return [o_encode(1.0 / k, fmt) for k in range(1, order + 1)]


def o_exp(a: SoftFloat, order: int = 12) -> SoftFloat:
    """Horner evaluation of the order-N Taylor polynomial of exp."""
    if order < 1:
        raise ValueError("Horner order must be at least 1")
    if abs(a.value) > 1.0:
        logger.warning(f"exp argument {a.value} is outside [-1, 1]; accuracy is not guaranteed")
    fmt = a.fmt
    one = o_encode(1.0, fmt)
    coefficients = horner_coefficients(fmt, order)
    h = o_add(one, o_mul(a, coefficients[order - 1]))
    for k in range(order - 1, 0, -1):
        p = o_mul(a, coefficients[k - 1])
        w = o_mul(p, h)
        h = o_add(one, w)
    return h


def enumerate_canonical(fmt: FloatFormat) -> Iterator[SoftFloat]:
    """
    Every canonical code once: zero first, then by exponent and mantissa.

    Raises:
        FormatError: If the format is wider than the enumeration bound
    """
    if fmt.width > MAX_ENUMERATION_WIDTH:
        raise FormatError(f"refusing to enumerate {fmt}: width above {MAX_ENUMERATION_WIDTH}")
    yield SoftFloat.zero(fmt)
    half = fmt.half
    mantissas = list(range(-2 * half + 1, -half + 1)) + list(range(half, 2 * half))
    for exp_code in range(fmt.min_exp, fmt.max_exp + 1):
        for mant_code in mantissas:
            yield SoftFloat(exp_code, mant_code, fmt)


def canonical_count(fmt: FloatFormat) -> int:
    return (1 << fmt.e) * (1 << (fmt.m - 1)) + 1


# ODE system u1' = u2, u2' = -u1 from u(0) = [0, -1]


@dataclass(frozen=True)
class OdeConstants:
    """Trapezoidal update matrix entries."""

    c11: float
    c12: float

    @classmethod
    def for_step(cls, dt: float) -> "OdeConstants":
        scale = 1.0 + dt * dt / 4.0
        return cls((1.0 - dt * dt / 4.0) / scale, dt / scale)


def o_ode_reference(dt: float, steps: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Double-precision trapezoidal trajectory and the analytic solution.

    Returns:
        (trajectory, exact), both of shape (steps + 1, 2); row k is t = k * dt
    """
    if dt <= 0:
        raise ValueError(f"time step must be positive, got {dt}")
    c = OdeConstants.for_step(dt)
    update = np.array([[c.c11, c.c12], [-c.c12, c.c11]])
    trajectory = np.empty((steps + 1, 2))
    trajectory[0] = (0.0, -1.0)
    for k in range(steps):
        trajectory[k + 1] = update @ trajectory[k]
    t = np.arange(steps + 1) * dt
    exact = -np.column_stack((np.sin(t), np.cos(t)))
    return trajectory, exact


def o_ode(fmt: FloatFormat, dt: float, steps: int) -> List[Tuple[SoftFloat, SoftFloat]]:
    """Trajectory of the ODE circuit in circuit arithmetic, step 0 included."""
    c = OdeConstants.for_step(dt)
    c11 = o_encode(c.c11, fmt)
    c12 = o_encode(c.c12, fmt)
    c12n = o_encode(-c.c12, fmt)
    u1, u2 = o_encode(0.0, fmt), o_encode(-1.0, fmt)
    trajectory = [(u1, u2)]
    for _ in range(steps):
        v1 = o_add(o_mul(c11, u1), o_mul(c12, u2))
        v2 = o_add(o_mul(c12n, u1), o_mul(c11, u2))
        u1, u2 = v1, v2
        trajectory.append((u1, u2))
    return trajectory
