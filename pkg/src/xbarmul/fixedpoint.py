"""Exact unsigned fixed-point arithmetic on the binary grid.

A value is ``numerator / 2**frac_bits`` restricted to [0, 1).  Cutting the
fraction bits into equal slices gives the digit form used to spread one
operand across several low-precision storage cells: ``digit_bits`` bits per
digit, most significant digit first.  The schoolbook product of two digit
vectors is an integer convolution, and recombining the convolution terms
with their binary weights reproduces the full double-width product exactly.

Everything in this module is plain integer arithmetic.  It is the ground
truth that the analog simulation (crossbar readout plus carry chain) is
checked against.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational


@dataclass(frozen=True, eq=False)
class FixedPointValue:
    """Unsigned scalar ``numerator / 2**frac_bits`` in [0, 1)."""

    numerator: int
    frac_bits: int

    def __post_init__(self) -> None:
        if self.frac_bits < 1:
            raise ValueError(f"frac_bits must be >= 1, got {self.frac_bits}")
        if not 0 <= self.numerator < (1 << self.frac_bits):
            raise ValueError(
                f"numerator {self.numerator} outside [0, 2**{self.frac_bits})"
            )

    @classmethod
    def from_float(cls, value: float, frac_bits: int) -> "FixedPointValue":
        """Exact conversion; rejects values off the 2**-frac_bits grid."""
        return cls.from_fraction(Fraction(value), frac_bits)

    @classmethod
    def from_fraction(cls, value: Rational, frac_bits: int) -> "FixedPointValue":
        scaled = Fraction(value) * (1 << frac_bits)
        if scaled.denominator != 1:
            raise ValueError(
                f"{value} is not representable with {frac_bits} fractional bits"
            )
        return cls(int(scaled), frac_bits)

    def as_fraction(self) -> Fraction:
        return Fraction(self.numerator, 1 << self.frac_bits)

    def bit_string(self) -> str:
        """Binary expansion ``0.b1b2...`` with exactly frac_bits digits."""
        return "0." + format(self.numerator, f"0{self.frac_bits}b")

    def __float__(self) -> float:
        return self.numerator / (1 << self.frac_bits)

    def __eq__(self, other: object) -> bool:
        # Exact equality after aligning the fractional grids.
        if isinstance(other, FixedPointValue):
            return (self.numerator << other.frac_bits) == (
                other.numerator << self.frac_bits
            )
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.as_fraction())

    def __repr__(self) -> str:
        return f"FixedPointValue({self.numerator}, frac_bits={self.frac_bits})"


@dataclass(frozen=True)
class DigitVector:
    """Radix-2**digit_bits digits of a value in [0, 1), most significant first."""

    digits: tuple[int, ...]
    digit_bits: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "digits", tuple(int(d) for d in self.digits))
        if self.digit_bits < 1:
            raise ValueError(f"digit_bits must be >= 1, got {self.digit_bits}")
        if not self.digits:
            raise ValueError("a digit vector needs at least one digit")
        top = 1 << self.digit_bits
        for d in self.digits:
            if not 0 <= d < top:
                raise ValueError(f"digit {d} outside [0, {top})")

    @property
    def digit_count(self) -> int:
        return len(self.digits)

    def normalized(self) -> tuple[float, ...]:
        """Digit amplitudes in [0, 1): ``digit / 2**digit_bits`` (exact floats)."""
        scale = float(1 << self.digit_bits)
        return tuple(d / scale for d in self.digits)


@dataclass(frozen=True)
class PartialSumsExact:
    """Integer convolution terms of two digit vectors.

    ``values[j] = sum(x[p] * y[q] for p + q == j)`` with 0-based slots
    ``j = 0 .. 2k-2`` (most significant slot first).  Each entry is in grid
    units of ``2**-(2*digit_bits)``.
    """

    values: tuple[int, ...]
    digit_bits: int
    digit_count: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        k = self.digit_count
        if len(self.values) != 2 * k - 1:
            raise ValueError(
                f"expected {2 * k - 1} slots for {k} digits, got {len(self.values)}"
            )
        cap = ((1 << self.digit_bits) - 1) ** 2
        for j, v in enumerate(self.values):
            limit = band_width(j, k) * cap
            if not 0 <= v <= limit:
                raise ValueError(f"slot {j} value {v} exceeds its cap {limit}")


def band_width(slot: int, digit_count: int) -> int:
    """Number of digit pairs that land in a convolution slot."""
    k = digit_count
    if not 0 <= slot <= 2 * k - 2:
        raise ValueError(f"slot {slot} outside [0, {2 * k - 2}]")
    return min(slot + 1, k, 2 * k - 1 - slot)


def decompose(value: FixedPointValue, digit_bits: int, digit_count: int) -> DigitVector:
    """Cut a value into ``digit_count`` digits of ``digit_bits`` bits each.

    Digit 0 holds the most significant bits.  Values whose fractional width
    is below ``digit_bits * digit_count`` are zero-padded on the low end;
    wider values are rejected rather than silently truncated.
    """
    if digit_bits < 1 or digit_count < 1:
        raise ValueError("digit_bits and digit_count must be >= 1")
    width = digit_bits * digit_count
    if value.frac_bits > width:
        raise ValueError(
            f"{value.frac_bits} fractional bits do not fit into "
            f"{digit_count} digits of {digit_bits} bits"
        )
    padded = value.numerator << (width - value.frac_bits)
    mask = (1 << digit_bits) - 1
    digits = tuple(
        (padded >> ((digit_count - 1 - j) * digit_bits)) & mask
        for j in range(digit_count)
    )
    return DigitVector(digits, digit_bits)


def recompose(digits: DigitVector) -> FixedPointValue:
    """Exact inverse of :func:`decompose`; result has ``k * digit_bits`` bits."""
    k = digits.digit_count
    numerator = 0
    for j, d in enumerate(digits.digits):
        numerator |= d << ((k - 1 - j) * digits.digit_bits)
    return FixedPointValue(numerator, k * digits.digit_bits)


def partial_sums_exact(xd: DigitVector, yd: DigitVector) -> PartialSumsExact:
    """Schoolbook convolution of two digit vectors, kept as exact integers."""
    if xd.digit_bits != yd.digit_bits:
        raise ValueError(
            f"digit widths differ: {xd.digit_bits} vs {yd.digit_bits}"
        )
    if xd.digit_count != yd.digit_count:
        raise ValueError(
            f"digit counts differ: {xd.digit_count} vs {yd.digit_count}"
        )
    k = xd.digit_count
    values = [0] * (2 * k - 1)
    for p, xv in enumerate(xd.digits):
        if xv == 0:
            continue
        for q, yv in enumerate(yd.digits):
            values[p + q] += xv * yv
    return PartialSumsExact(tuple(values), xd.digit_bits, k)


def exact_product(x: FixedPointValue, y: FixedPointValue) -> FixedPointValue:
    """Reference product: integer multiply, full double-width result."""
    return FixedPointValue(x.numerator * y.numerator, x.frac_bits + y.frac_bits)


def assemble_from_partials(sums: PartialSumsExact) -> FixedPointValue:
    """Recombine convolution slots into the exact 2*k*digit_bits-bit product."""
    m, k = sums.digit_bits, sums.digit_count
    numerator = 0
    for j, v in enumerate(sums.values):
        numerator += v << ((2 * k - 2 - j) * m)
    return FixedPointValue(numerator, 2 * k * m)
