"""
Fixed-point and floating-point format descriptors.
"""
from dataclasses import dataclass
from typing import Dict, Tuple

from qfp.errors import QfpError

# Default (exponent, mantissa) split for each benchmark width
WIDTH_SPLITS: Dict[int, Tuple[int, int]] = {
    10: (4, 6),
    12: (5, 7),
    14: (5, 9),
    16: (5, 11),
    18: (6, 12),
    20: (7, 13),
}

# ODE runs keep e = 5 and give the rest to the mantissa; the state stays near
# unit norm, and fadd needs m <= 2^(e-1)
ODE_SPLITS: Dict[int, Tuple[int, int]] = {
    10: (5, 5),
    12: (5, 7),
    14: (5, 9),
    16: (5, 11),
    18: (5, 13),
    20: (5, 15),
}


class FormatError(QfpError):
    """Raised for invalid fixed/float formats or mismatched register widths."""
    pass


@dataclass(frozen=True)
class FixedFormat:
    """(n, f) fixed-point format: n qubits, f of them fractional."""

    n: int
    f: int = 0
    signed: bool = True

    def __post_init__(self):
        if not 1 <= self.n <= 64:
            raise FormatError(f"fixed-point width must be in [1, 64], got {self.n}")
        if not 0 <= self.f <= self.n:
            raise FormatError(f"fraction bits must be in [0, {self.n}], got {self.f}")

    @property
    def modulus(self) -> int:
        return 1 << self.n

    @property
    def min_code(self) -> int:
        return -(1 << (self.n - 1)) if self.signed else 0

    @property
    def max_code(self) -> int:
        return (1 << (self.n - 1)) - 1 if self.signed else (1 << self.n) - 1

    def interpret(self, raw: int) -> int:
        """Integer code of an n-bit pattern (two's complement when signed)."""
        raw &= self.modulus - 1
        if self.signed and raw >> (self.n - 1):
            return raw - self.modulus
        return raw

    def value(self, raw: int) -> float:
        return self.interpret(raw) * 2.0 ** -self.f



@dataclass(frozen=True)
class FloatFormat:
    """
    (e, m) float format.

    The exponent is an e-bit two's complement integer; the mantissa an m-bit
    two's complement fixed-point number with m - 1 fraction bits. A value is
    mantissa * 2^exponent.
    """

    e: int
    m: int

    def __post_init__(self):
        if self.e < 2 or self.m < 2:
            raise FormatError(f"float format needs e >= 2 and m >= 2, got (e={self.e}, m={self.m})")
        if self.e + self.m > 64:
            raise FormatError(f"float format wider than 64 bits: (e={self.e}, m={self.m})")

    @classmethod
    def for_width(cls, width: int) -> "FloatFormat":
        """Default split of a total width."""
        if width not in WIDTH_SPLITS:
            raise FormatError(f"no default (e, m) split for width {width}")
        return cls(*WIDTH_SPLITS[width])

    @property
    def width(self) -> int:
        return self.e + self.m

    @property
    def exp_fmt(self) -> FixedFormat:
        return FixedFormat(self.e, 0, True)

    @property
    def mant_fmt(self) -> FixedFormat:
        return FixedFormat(self.m, self.m - 1, True)

    @property
    def min_exp(self) -> int:
        return -(1 << (self.e - 1))

    @property
    def max_exp(self) -> int:
        return (1 << (self.e - 1)) - 1

    @property
    def half(self) -> int:
        """Mantissa code of 0.5."""
        return 1 << (self.m - 2)

    def __str__(self) -> str:
        return f"(e={self.e}, m={self.m})"
