"""Carry chain that recovers exact product digits from noisy column sums.

Each convolution slot feeds one cell.  A cell adds the incoming carry to
its analog input through a two-conductance summing stage (weights 1 and
``2**-digit_bits``), snaps the sum to the ``2**-(2*digit_bits)`` grid with
a round-to-nearest converter, keeps the low ``digit_bits`` bits as its
output digit and hands the remaining high bits to the next, more
significant cell.  Cells run from the least significant slot upward; the
final carry becomes the product's top digit.

As long as every slot's analog error stays strictly below half a grid
step, the rounded codes match the exact integer convolution and the chain
reproduces the full-width product bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .crossbar import NoiseModel, PartialSumsAnalog
from .fixedpoint import DigitVector, FixedPointValue, recompose


class ChainFault(ArithmeticError):
    """An analog value escaped the converter's design range."""

    def __init__(self, message: str, slot: int | None = None):
        super().__init__(message)
        self.slot = slot

    def __str__(self) -> str:
        base = super().__str__()
        return base if self.slot is None else f"{base} (slot {self.slot})"


class SaturationError(ChainFault):
    """Converter input fell outside the representable code range."""


class CarryOverflowError(ChainFault):
    """A carry no longer fits the configured carry field."""


@dataclass(frozen=True)
class AdcConfig:
    """Converter geometry: total code width and the digit split.

    Codes live on the ``2**-(2*digit_bits)`` grid.  The low ``digit_bits``
    bits of a code are the cell's output digit; the remaining
    ``total_bits - digit_bits`` form the carry field.
    """

    total_bits: int
    digit_bits: int

    def __post_init__(self) -> None:
        if self.digit_bits < 1:
            raise ValueError(f"digit_bits must be >= 1, got {self.digit_bits}")
        if self.total_bits < 2 * self.digit_bits + 1:
            raise ValueError(
                f"total_bits {self.total_bits} below minimum "
                f"{2 * self.digit_bits + 1} for {self.digit_bits}-bit digits"
            )

    @classmethod
    def for_geometry(cls, digit_bits: int, digit_count: int) -> "AdcConfig":
        """Smallest width that holds the full grid plus worst-case cell sums."""
        if digit_count < 1:
            raise ValueError(f"digit_count must be >= 1, got {digit_count}")
        return cls(2 * digit_bits + math.ceil(math.log2(digit_count + 1)), digit_bits)

    @property
    def grid(self) -> float:
        return 2.0 ** (-2 * self.digit_bits)

    @property
    def max_code(self) -> int:
        return (1 << self.total_bits) - 1

    @property
    def carry_bits(self) -> int:
        return self.total_bits - self.digit_bits

    @property
    def carry_limit(self) -> int:
        return 1 << self.carry_bits

    def covers(self, digit_count: int) -> bool:
        """True when worst-case cell sums for this many digits cannot overflow."""
        worst = digit_count * ((1 << self.digit_bits) - 1) * (1 << self.digit_bits)
        return worst + self.carry_limit - 1 <= self.max_code


def quantize(value: float, adc: AdcConfig) -> int:
    """Snap an analog value to the nearest grid code, ties rounding up.

    Inputs more than half a grid step outside [0, max_code * grid] raise
    :class:`SaturationError` - the signal that noise exceeded the design
    margin rather than a value to be silently clamped.
    """
    scaled = value * (1 << (2 * adc.digit_bits))
    code = math.floor(scaled + 0.5)
    if code < 0 or code > adc.max_code:
        raise SaturationError(
            f"value {value!r} outside the {adc.total_bits}-bit converter range"
        )
    return code


@dataclass(frozen=True)
class ChainStep:
    """Record of one cell evaluation (used by traces and diagnostics)."""

    slot: int
    analog_in: float
    carry_in: int
    analog_sum: float
    code: int
    digit: int
    carry_out: int


@dataclass(frozen=True)
class ProductDigits:
    """Recovered product digits, most significant first (always 2k of them)."""

    digits: tuple[int, ...]
    digit_bits: int
    steps: tuple[ChainStep, ...] = field(default=(), compare=False, repr=False)

    def value(self) -> FixedPointValue:
        return recompose(DigitVector(self.digits, self.digit_bits))

    def bit_string(self) -> str:
        return self.value().bit_string()


def chain_cell(
    analog_in: float,
    carry_in: int,
    adc: AdcConfig,
    noise: NoiseModel | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[int, int]:
    """One cell: align, sum, convert; returns (digit, carry_out).

    The carry arrives as the integer re-emitted by the upstream converter's
    inline DAC and is scaled into this slot's units by the ``2**-digit_bits``
    summing conductance.  ``chain_noise`` perturbs both summing conductances.
    """
    m = adc.digit_bits
    if not 0 <= carry_in < adc.carry_limit:
        raise CarryOverflowError(
            f"carry {carry_in} exceeds the {adc.carry_bits}-bit carry field"
        )
    g_direct = 1.0
    g_carry = 2.0 ** -m
    if noise is not None and noise.chain_noise != 0:
        if rng is None:
            rng = noise.make_rng()
        eps = noise.draw(rng, noise.chain_noise, 2)
        g_direct += eps[0]
        g_carry += eps[1]
    total = analog_in * g_direct + (carry_in * 2.0 ** -m) * g_carry
    code = quantize(total, adc)
    return code & ((1 << m) - 1), code >> m


def run_chain(
    sums: PartialSumsAnalog,
    adc: AdcConfig | None = None,
    noise: NoiseModel | None = None,
    rng: np.random.Generator | None = None,
    *,
    carry_dac=None,
) -> ProductDigits:
    """Evaluate all cells from the least significant slot upward.

    ``carry_dac`` optionally replaces the ideal carry re-emission: it is
    called as ``carry_dac(carry, slot)`` and must return the re-emitted
    integer carry (use it to model a non-ideal DAC).  Chain faults are
    annotated with the slot that raised them.
    """
    m, k = sums.digit_bits, sums.digit_count
    if adc is None:
        adc = AdcConfig.for_geometry(m, k)
    if adc.digit_bits != m:
        raise ValueError(f"converter digit width {adc.digit_bits} != slot width {m}")
    if not adc.covers(k):
        raise ValueError(
            f"{adc.total_bits}-bit converter cannot hold worst-case sums of {k} digits"
        )
    if rng is None and noise is not None and noise.chain_noise != 0:
        rng = noise.make_rng()
    carry = 0
    steps: list[ChainStep] = []
    for slot in range(2 * k - 2, -1, -1):
        analog_in = float(sums.values[slot])
        try:
            digit, carry_out = chain_cell(analog_in, carry, adc, noise, rng)
        except ChainFault as fault:
            fault.slot = slot
            raise
        steps.append(
            ChainStep(
                slot=slot,
                analog_in=analog_in,
                carry_in=carry,
                analog_sum=analog_in + carry * 2.0 ** (-2 * m),
                code=(carry_out << m) | digit,
                digit=digit,
                carry_out=carry_out,
            )
        )
        carry = carry_out if carry_dac is None else int(carry_dac(carry_out, slot))
    if carry >= (1 << m):
        raise CarryOverflowError(
            f"final carry {carry} does not fit a {m}-bit top digit", slot=0
        )
    digits = (carry, *(s.digit for s in reversed(steps)))
    return ProductDigits(digits, m, tuple(steps))
