"""
Pytest configuration and fixtures.
"""
import math

import pytest

from qfp.backends import run
from qfp.circuit import Circuit
from qfp.experiments import dominant_index
from qfp.formats import FloatFormat
from qfp.state import RngStream, SparseState


class FixedDraw:
    """Stand-in random stream that always returns the same uniform draw."""

    def __init__(self, value: float):
        self.value = value

    def uniform(self) -> float:
        return self.value


@pytest.fixture
def low_draw():
    """Stream whose draws always select measurement outcome 0."""
    return FixedDraw(0.0)


@pytest.fixture
def high_draw():
    """Stream whose draws select outcome 1 whenever it has non-zero probability."""
    return FixedDraw(1.0 - 1e-12)


@pytest.fixture
def bell_like_state():
    """(|001> + |110>) / sqrt(2) on three qubits, ancilla on qubit 0."""
    amp = 1.0 / math.sqrt(2.0)
    return SparseState(3, {0b001: amp, 0b110: amp})


@pytest.fixture
def tiny_fmt():
    """Smallest format that supports both multiplication and addition."""
    return FloatFormat(3, 4)


@pytest.fixture
def small_fmt():
    """Default split for 10-qubit floats."""
    return FloatFormat(4, 6)


@pytest.fixture
def run_index():
    """Run a circuit on a basis state and return the dominant output index."""

    def _run(circuit: Circuit, index: int, backend: str = "semantic", seed: int = 7) -> int:
        initial = SparseState.basis(circuit.num_qubits, index)
        state, _ = run(circuit, initial, backend, RngStream(seed))
        return dominant_index(state)

    return _run
