"""
Tests for the classical float model.
"""
import math

import numpy as np
import pytest

from qfp.formats import FixedFormat, FloatFormat, FormatError
from qfp.oracle import (
    EncodingOverflowError,
    EncodingUnderflowError,
    OdeConstants,
    RangeStatus,
    SoftFloat,
    canonical_count,
    enumerate_canonical,
    o_add,
    o_encode,
    o_exp,
    o_fixed_decode,
    o_fixed_encode,
    o_mul,
    o_neg,
    o_ode,
    o_ode_reference,
    o_recip,
    o_shift,
    o_zeroexp,
)


def test_encode_pi():
    """Test pi in a 16-bit (5, 11) float."""
    code = o_encode(math.pi, FloatFormat(5, 11))

    assert (code.exp_code, code.mant_code) == (2, 804)
    assert code.value == 3.140625
    assert code.is_canonical()


def test_encode_zero(small_fmt):
    """Test zero has the unique (0, 0) code."""
    code = o_encode(0.0, small_fmt)

    assert (code.exp_code, code.mant_code) == (0, 0)
    assert code.is_zero


def test_encode_rounding_modes(small_fmt):
    """Test nearest rounding and truncation toward zero."""
    assert o_encode(0.74, small_fmt).mant_code == 24
    assert o_encode(0.74, small_fmt, "truncate").mant_code == 23
    assert o_encode(-0.74, small_fmt).mant_code == -24
    assert o_encode(-0.74, small_fmt, "truncate").mant_code == -23


def test_encode_rounds_up_into_next_binade(small_fmt):
    """Test a mantissa rounded up to 1.0 is renormalized."""
    code = o_encode(0.999, small_fmt)

    assert (code.exp_code, code.mant_code) == (1, 16)
    assert code.value == 1.0


def test_encode_out_of_range(small_fmt):
    """Test overflow and underflow are reported."""
    with pytest.raises(EncodingOverflowError):
        o_encode(2.0 ** 20, small_fmt)
    with pytest.raises(EncodingUnderflowError):
        o_encode(2.0 ** -20, small_fmt)
    with pytest.raises(ValueError):
        o_encode(1.0, small_fmt, "floor")


def test_fixed_encoding():
    """Test the fixed-point grid encoding."""
    fmt = FixedFormat(16, 8, True)

    assert o_fixed_encode(math.pi / 100, fmt) == 8
    assert o_fixed_decode(8, fmt) == 0.03125
    with pytest.raises(EncodingOverflowError):
        o_fixed_encode(200.0, fmt)
    with pytest.raises(EncodingUnderflowError):
        o_fixed_encode(0.001, fmt)


def test_canonical_enumeration(small_fmt):
    """Test every canonical code is listed once."""
    codes = list(enumerate_canonical(small_fmt))

    assert len(codes) == canonical_count(small_fmt) == 513
    assert len(set(codes)) == len(codes)
    assert codes[0] == SoftFloat.zero(small_fmt)
    assert all(c.is_canonical() for c in codes)


def test_enumeration_width_bound():
    """Test wide formats are not enumerated."""
    with pytest.raises(FormatError):
        list(enumerate_canonical(FloatFormat(5, 11)))


def test_mul_and_add_basics(small_fmt):
    """Test 1 * 1 and 0.5 + 0.5."""
    one = o_encode(1.0, small_fmt)
    half = o_encode(0.5, small_fmt)

    assert o_mul(one, one).value == 1.0
    assert o_add(half, half).value == 1.0


def test_mul_16_bit_example():
    """Test pi * 0.010002 in (5, 11) truncates the encoded product to 514 * 2^-14."""
    fmt = FloatFormat(5, 11)
    a = o_encode(3.140625, fmt)
    b = o_encode(0.010002, fmt)
    result = o_mul(a, b)

    assert (b.exp_code, b.mant_code) == (-6, 655)
    assert (result.exp_code, result.mant_code) == (-4, 514)
    assert abs(result.value - a.value * b.value) < 2.0 ** -14
    assert abs(result.value - 0.031403) / 0.031403 < 2.0 ** -9


def test_add_16_bit_example():
    """Test 0.03140 + (-0.02454) in (5, 11) is exact on the encoded operands."""
    fmt = FloatFormat(5, 11)
    a = o_encode(0.03140, fmt)
    b = o_encode(-0.02454, fmt)
    result = o_add(a, b)

    assert (a.mant_code, b.mant_code) == (514, -804)
    assert (result.exp_code, result.mant_code) == (-7, 896)
    assert result.value == a.value + b.value
    assert abs(result.value - 0.006866) / 0.006866 < 2.0 ** -7


def test_add_cancellation_gives_canonical_zero(small_fmt):
    """Test x + (-x) is the unique zero."""
    one = o_encode(1.0, small_fmt)
    result = o_add(one, o_neg(one))

    assert (result.exp_code, result.mant_code) == (0, 0)


def test_mul_sign_and_truncation(small_fmt):
    """Test products truncate toward zero."""
    a = o_encode(-0.75, small_fmt)
    b = o_encode(0.40625, small_fmt)
    result = o_mul(a, b)

    assert result.value < 0
    assert abs(result.value) <= abs(a.value * b.value)
    assert abs(result.value - a.value * b.value) < result.ulp()


def test_add_requires_counter_room():
    """Test addition refuses formats whose counter would not fit."""
    fmt = FloatFormat(3, 6)
    with pytest.raises(FormatError):
        o_add(o_encode(1.0, fmt), o_encode(1.0, fmt))


def test_neg_flags_most_negative_code(small_fmt):
    """Test the mantissa code of -1 has no positive partner."""
    assert o_neg(SoftFloat(0, -32, small_fmt)).status == RangeStatus.INVALID
    assert o_neg(o_encode(0.5, small_fmt)).value == -0.5


def test_shift_fills_with_sign():
    """Test signed right shifts round toward minus infinity."""
    fmt = FixedFormat(4, 0, True)

    assert o_shift(-5, fmt, 1) == -3
    assert o_shift(-1, fmt, 1) == -1
    assert o_shift(-1, fmt, 3) == -1
    assert o_shift(-6, fmt, 1) == -3
    assert o_shift(-8, fmt, 7) == -1
    assert o_shift(5, fmt, 1) == 2
    assert o_shift(3, fmt, -1) == 6
    assert o_shift(-5, fmt, -1) == 6
    assert o_shift(7, fmt, 4) == 0
    assert o_shift(0b0110, FixedFormat(4, 0, False), 1) == 0b0011


def test_shift_matches_floor_division_exhaustive():
    """Test every 6-bit signed code against floor division by 2^k."""
    fmt = FixedFormat(6, 0, True)
    for code in range(-32, 32):
        for k in range(8):
            assert o_shift(code, fmt, k) == code // (1 << k)


def test_zeroexp(small_fmt):
    """Test a zero mantissa gets a zero exponent."""
    assert o_zeroexp(SoftFloat(3, 0, small_fmt)).exp_code == 0
    assert o_zeroexp(SoftFloat(3, 16, small_fmt)).exp_code == 3


def test_recip_converges():
    """Test the Newton reciprocal of 4 in a 16-bit format."""
    result = o_recip(o_encode(4.0, FloatFormat(5, 11)))

    assert result.ok
    assert abs(result.value - 0.25) / 0.25 <= 2.0 ** -9


def test_recip_of_negative():
    """Test the reciprocal keeps the sign."""
    fmt = FloatFormat(7, 13)
    result = o_recip(o_encode(-3.0, fmt))

    assert result.value == pytest.approx(-1 / 3, rel=2.0 ** -9)


def test_recip_unrepresentable(small_fmt):
    """Test zero and out-of-range reciprocals are flagged."""
    assert o_recip(o_encode(0.0, small_fmt)).status == RangeStatus.UNREPRESENTABLE
    assert o_recip(o_encode(0.003, small_fmt)).status == RangeStatus.UNREPRESENTABLE


def test_exp_horner():
    """Test exp on [-1, 1] in a 20-bit format."""
    fmt = FloatFormat(7, 13)

    assert o_exp(o_encode(0.0, fmt)).value == 1.0
    assert o_exp(o_encode(0.5, fmt)).value == pytest.approx(math.exp(0.5), rel=1e-2)
    assert o_exp(o_encode(-1.0, fmt)).value == pytest.approx(math.exp(-1.0), rel=2e-2)


def test_ode_constants_preserve_norm():
    """Test the trapezoidal update matrix is a rotation."""
    c = OdeConstants.for_step(0.5)

    assert c.c11 ** 2 + c.c12 ** 2 == pytest.approx(1.0)


def test_ode_reference():
    """Test the double-precision trajectory tracks the analytic solution."""
    trajectory, exact = o_ode_reference(2.0 ** -4, 100)

    assert trajectory.shape == exact.shape == (101, 2)
    assert list(exact[0]) == [0.0, -1.0]
    assert np.max(np.abs(trajectory - exact)) < 1e-2


def test_ode_soft_float_trajectory():
    """Test the circuit-arithmetic trajectory starts at (0, -1) and stays close."""
    fmt = FloatFormat(7, 13)
    trajectory = o_ode(fmt, 0.25, 8)
    _, exact = o_ode_reference(0.25, 8)

    assert [v.value for v in trajectory[0]] == [0.0, -1.0]
    assert len(trajectory) == 9
    values = np.array([[u1.value, u2.value] for u1, u2 in trajectory])
    assert np.max(np.abs(values - exact)) < 5e-2


@pytest.mark.slow
def test_mul_within_one_ulp_exhaustive(small_fmt):
    """Test every in-range product at width 10 is within 1 ulp."""
    codes = list(enumerate_canonical(small_fmt))
    violations = 0
    for a in codes:
        for b in codes:
            result = o_mul(a, b)
            if result.ok and abs(result.value - a.value * b.value) >= result.ulp():
                violations += 1

    assert violations == 0


@pytest.mark.slow
def test_add_within_two_ulp_exhaustive(small_fmt):
    """Test every in-range sum at width 10 is within 2 ulp."""
    codes = list(enumerate_canonical(small_fmt))
    violations = 0
    for a in codes:
        for b in codes:
            result = o_add(a, b)
            if result.ok and abs(result.value - (a.value + b.value)) > 2 * result.ulp():
                violations += 1

    assert violations == 0
