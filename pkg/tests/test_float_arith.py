"""
Tests for floating-point circuits.
"""
import numpy as np
import pytest

from qfp.backends import run
from qfp.circuit import Circuit, CircuitError
from qfp.experiments import build_recip
from qfp.fixed_arith import FixedReg, register
from qfp.float_arith import (
    canonical_violations,
    fadd,
    fexp,
    float_register,
    fmul,
    fneg,
    load_const,
    recip,
    shift,
    zero_exp,
)
from qfp.formats import FixedFormat, FloatFormat, FormatError
from qfp.oracle import (
    enumerate_canonical,
    o_add,
    o_encode,
    o_exp,
    o_mul,
    o_neg,
    o_recip,
    o_shift,
    o_zeroexp,
    zero_exp_codes,
)
from qfp.state import RngStream, SparseState


def _binary(fmt: FloatFormat, op):
    circuit = Circuit()
    q = float_register(circuit, "q", fmt)
    r = float_register(circuit, "r", fmt)
    out = float_register(circuit, "out", fmt)
    op(circuit, q, r, out)
    return circuit, q, r, out


def _pairs(fmt: FloatFormat):
    codes = list(enumerate_canonical(fmt))
    return [(codes[i], codes[j]) for i, j in ((1, 64), (10, 33), (33, 33), (0, 20), (50, 5), (64, 40))]


def test_fmul_one_times_one(run_index, small_fmt):
    """Test 1.0 * 1.0 = 1.0."""
    circuit, q, r, out = _binary(small_fmt, fmul)
    one = o_encode(1.0, small_fmt)
    index = run_index(circuit, r.write(q.write(0, one), one))

    assert out.value(index) == 1.0
    assert circuit.pool.live == 0


def test_fadd_half_plus_half(run_index, small_fmt):
    """Test 0.5 + 0.5 = 1.0."""
    circuit, q, r, out = _binary(small_fmt, fadd)
    half = o_encode(0.5, small_fmt)
    index = run_index(circuit, r.write(q.write(0, half), half))

    assert out.value(index) == 1.0


def test_fmul_semantic_matches_oracle_exhaustive(run_index, tiny_fmt):
    """Test the multiplication circuit against the oracle on all canonical pairs."""
    circuit, q, r, out = _binary(tiny_fmt, fmul)
    codes = list(enumerate_canonical(tiny_fmt))
    for a in codes:
        for b in codes:
            index = run_index(circuit, r.write(q.write(0, a), b))
            assert out.read(index) == o_mul(a, b)
            assert q.read(index) == a and r.read(index) == b


def test_fadd_semantic_matches_oracle_exhaustive(run_index, tiny_fmt):
    """Test the addition circuit against the oracle on all canonical pairs."""
    circuit, q, r, out = _binary(tiny_fmt, fadd)
    codes = list(enumerate_canonical(tiny_fmt))
    for a in codes:
        for b in codes:
            index = run_index(circuit, r.write(q.write(0, a), b))
            assert out.read(index) == o_add(a, b)


@pytest.mark.parametrize("op", [fmul, fadd])
def test_gate_backend_matches_semantic(run_index, tiny_fmt, op):
    """Test gate-faithful execution lands on the semantic result."""
    circuit, q, r, out = _binary(tiny_fmt, op)
    for a, b in _pairs(tiny_fmt):
        index = r.write(q.write(0, a), b)
        assert run_index(circuit, index, "gate") == run_index(circuit, index, "semantic")


def _all_pairs_state(circuit: Circuit, q, r, codes) -> SparseState:
    amp = 1.0 / len(codes)
    entries = {r.write(q.write(0, a), b): amp + 0j for a in codes for b in codes}
    return SparseState(circuit.num_qubits, entries)


@pytest.mark.slow
@pytest.mark.parametrize("op, model", [(fmul, o_mul), (fadd, o_add)])
def test_semantic_matches_oracle_on_all_canonical_pairs(small_fmt, op, model):
    """Test every canonical (4, 6) pair in one superposed run."""
    circuit, q, r, out = _binary(small_fmt, op)
    codes = list(enumerate_canonical(small_fmt))
    state, _ = run(circuit, _all_pairs_state(circuit, q, r, codes), "semantic", RngStream(1))

    assert len(state) == len(codes) ** 2
    for index in state.entries:
        assert out.read(index) == model(q.read(index), r.read(index))


@pytest.mark.slow
@pytest.mark.parametrize("op", [fmul, fadd])
def test_gate_backend_matches_semantic_on_random_pairs(run_index, small_fmt, op):
    """Test gate-faithful runs of 1000 random canonical (4, 6) pairs."""
    circuit, q, r, out = _binary(small_fmt, op)
    codes = list(enumerate_canonical(small_fmt))
    rng = np.random.default_rng(2024)
    for i, j in rng.integers(0, len(codes), size=(1000, 2)):
        index = r.write(q.write(0, codes[i]), codes[j])
        assert run_index(circuit, index, "gate") == run_index(circuit, index, "semantic")


def test_unary_ops_match_oracle_on_all_canonical_codes(run_index, small_fmt):
    """Test zero_exp and fneg on every canonical (4, 6) code."""
    for op, model in ((zero_exp, o_zeroexp), (fneg, o_neg)):
        circuit = Circuit()
        reg = float_register(circuit, "q", small_fmt)
        op(circuit, reg)
        for code in enumerate_canonical(small_fmt):
            assert reg.read(run_index(circuit, reg.write(0, code))) == model(code)


def test_mantissa_shift_matches_oracle_exhaustive(run_index, small_fmt):
    """Test the shift on every (4, 6) mantissa pattern and exponent-width amount."""
    circuit = Circuit()
    q = register(circuit, "q", small_fmt.mant_fmt)
    s = register(circuit, "s", FixedFormat(small_fmt.e + 1, 0, True))
    shift(circuit, q, s)

    for raw in range(q.fmt.modulus):
        for amount in range(s.fmt.modulus):
            out = run_index(circuit, s.write(q.write(0, raw), amount))
            assert q.code(out) == o_shift(q.fmt.interpret(raw), q.fmt, s.fmt.interpret(amount))


def test_fmul_requires_fresh_output(small_fmt):
    """Test an output register already written to is refused."""
    circuit, q, r, out = _binary(small_fmt, fmul)
    with pytest.raises(CircuitError):
        fmul(circuit, q, r, out)


def test_fadd_requires_counter_room():
    """Test formats with m > 2^(e-1) are refused."""
    with pytest.raises(FormatError):
        _binary(FloatFormat(3, 6), fadd)


@pytest.mark.parametrize("signed", [True, False])
def test_shift_gate_exhaustive(run_index, signed):
    """Test shifts by every signed amount on every 4-bit pattern."""
    circuit = Circuit()
    q = register(circuit, "q", FixedFormat(4, 0, signed))
    s = register(circuit, "s", FixedFormat(3, 0, True))
    shift(circuit, q, s)

    for raw in range(16):
        for amount in range(8):
            out = run_index(circuit, s.write(q.write(0, raw), amount), "gate")
            assert q.code(out) == o_shift(q.fmt.interpret(raw), q.fmt, s.fmt.interpret(amount))
            assert s.read(out) == amount
    assert circuit.pool.live == 0


def test_signed_right_shift_fills_with_sign(run_index):
    """Test the shift circuit floors negative values that are not multiples of 2^k."""
    circuit = Circuit()
    q = register(circuit, "q", FixedFormat(4, 0, True))
    s = register(circuit, "s", FixedFormat(3, 0, True))
    shift(circuit, q, s)

    cases = [(0b1011, 1, 0b1101), (0b1111, 1, 0b1111), (0b1010, 1, 0b1101), (0b1001, 2, 0b1110), (0b1101, 3, 0b1111)]
    for raw, amount, expected in cases:
        for backend in ("gate", "semantic"):
            out = run_index(circuit, s.write(q.write(0, raw), amount), backend)
            assert q.read(out) == expected


def test_zero_exp_gate_exhaustive(run_index, tiny_fmt):
    """Test the exponent is cleared exactly when the mantissa is zero."""
    circuit = Circuit()
    reg = float_register(circuit, "q", tiny_fmt)
    zero_exp(circuit, reg)

    for exp_raw in range(8):
        for mant_raw in (0, 1, 5, 8, 15):
            index = reg.mant.write(reg.exp.write(0, exp_raw), mant_raw)
            exp_code, mant_code = reg.codes(run_index(circuit, index, "gate"))
            assert (exp_code, mant_code) == zero_exp_codes(*reg.codes(index))


def test_fneg(run_index, small_fmt):
    """Test negation flips the mantissa sign only."""
    circuit = Circuit()
    reg = float_register(circuit, "q", small_fmt)
    fneg(circuit, reg)
    value = o_encode(0.75, small_fmt)
    index = run_index(circuit, reg.write(0, value), "gate")

    assert reg.read(index).value == -0.75


def test_load_const(run_index, small_fmt):
    """Test constants are written with X gates."""
    circuit = Circuit()
    reg = float_register(circuit, "c", small_fmt)
    code = load_const(circuit, reg, -2.5)

    assert code.value == -2.5
    assert reg.read(run_index(circuit, 0, "gate")) == code
    with pytest.raises(CircuitError):
        load_const(circuit, reg, 1.0)


@pytest.mark.parametrize("value", [4.0, -3.0, 0.3, 17.5])
def test_recip_matches_oracle(run_index, value):
    """Test the reciprocal circuit reproduces the oracle bit for bit."""
    fmt = FloatFormat(5, 11)
    built = build_recip(fmt, 6)
    a = o_encode(value, fmt)
    index = run_index(built.circuit, built.q.write(0, a))

    assert built.result.read(index) == o_recip(a, 6)
    assert built.result.value(index) == pytest.approx(1 / a.value, rel=2.0 ** -8)


def test_recip_gate_backend(run_index, tiny_fmt):
    """Test one Newton iteration under the gate-faithful backend."""
    circuit = Circuit()
    q = float_register(circuit, "q", tiny_fmt)
    result = recip(circuit, q, iterations=1)
    index = q.write(0, o_encode(1.5, tiny_fmt))

    assert run_index(circuit, index, "gate") == run_index(circuit, index, "semantic")
    assert result.read(run_index(circuit, index)) == o_recip(o_encode(1.5, tiny_fmt), 1)


def test_recip_register_count_is_fixed(small_fmt):
    """Test more iterations reuse the same registers."""
    short = build_recip(small_fmt, 2).circuit
    long = build_recip(small_fmt, 6).circuit

    assert short.num_qubits == long.num_qubits
    assert long.stats().gate_count > short.stats().gate_count


def test_recip_ancilla_peak(small_fmt):
    """Test scratch usage of the reciprocal at width 10."""
    stats = build_recip(small_fmt, 2).circuit.stats()

    assert 6 <= stats.ancilla_high_water <= 8


@pytest.mark.slow
def test_recip_ancilla_peak_width_20():
    """Test the reciprocal at width 20 stays near 13 scratch qubits."""
    stats = build_recip(FloatFormat.for_width(20), 10).circuit.stats()

    assert stats.ancilla_high_water <= 15


def test_fexp_matches_oracle(run_index):
    """Test the Horner circuit against the oracle."""
    fmt = FloatFormat(5, 11)
    circuit = Circuit()
    q = float_register(circuit, "q", fmt)
    result = fexp(circuit, q, order=5)
    a = o_encode(0.5, fmt)
    index = run_index(circuit, q.write(0, a))

    assert result.read(index) == o_exp(a, order=5)


def test_canonical_violations(small_fmt):
    """Test non-canonical register contents are reported."""
    circuit = Circuit()
    reg = float_register(circuit, "q", small_fmt)
    good = reg.write(0, o_encode(0.75, small_fmt))
    bad = reg.mant.write(0, 3)

    assert canonical_violations(reg, [good, bad]) == [bad]


def test_float_register_layout(small_fmt):
    """Test mantissa qubits come before exponent qubits."""
    circuit = Circuit()
    reg = float_register(circuit, "q", small_fmt)

    assert reg.qubits == tuple(range(10))
    assert circuit.labels["q.m"] == list(range(6))
    assert isinstance(reg.exp, FixedReg)
