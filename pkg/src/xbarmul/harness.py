"""Experiment driver: single trials, Monte Carlo sweeps, noise margins.

A trial runs one multiplication end to end: decompose both operands,
program one of them into a crossbar with write noise, drive the rows with
the other under input noise, push the column sums through the carry chain
and compare the recovered product against the exact integer oracle.  All
error bookkeeping is exact rational arithmetic.

Every trial derives its own random stream from (master seed, trial index),
so sweep results do not depend on execution order and a fixed seed gives
byte-identical CSV output.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import IO, Mapping

import numpy as np

from .chain import AdcConfig, ChainFault, ProductDigits, run_chain
from .crossbar import (
    ConductanceMatrix,
    NoiseModel,
    PartialSumsAnalog,
    analog_mac,
    build_multiplier_layout,
    program_array,
)
from .fixedpoint import (
    DigitVector,
    FixedPointValue,
    decompose,
    exact_product,
    partial_sums_exact,
)


def parse_magnitude(text: str | float | int) -> float:
    """Parse a tolerance/noise magnitude: ``2^-8``, ``0``, or a plain number.

    Power-of-two syntax is preferred in config files because it is exact;
    the returned float carries it without rounding.
    """
    if isinstance(text, (int, float)):
        return float(text)
    s = text.strip()
    if "^" in s:
        base, _, exponent = s.partition("^")
        if base.strip() != "2":
            raise ValueError(f"only base-2 magnitudes are supported, got {text!r}")
        return float(2.0 ** int(exponent.strip()))
    return float(s)


@dataclass(frozen=True)
class SimulationConfig:
    """Multiplier geometry plus the experiment's noise and trial settings."""

    operand_bits: int
    digit_bits: int
    digit_count: int
    noise: NoiseModel = NoiseModel()
    trials: int = 1
    seed: int | None = None
    adc_bits: int | None = None

    def __post_init__(self) -> None:
        if self.digit_bits < 1 or self.digit_count < 1:
            raise ValueError("digit_bits and digit_count must be >= 1")
        if self.operand_bits != self.digit_bits * self.digit_count:
            raise ValueError(
                f"operand_bits must equal digit_bits * digit_count "
                f"({self.operand_bits} != {self.digit_bits} * {self.digit_count})"
            )
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.adc_bits is not None and not AdcConfig(
            self.adc_bits, self.digit_bits
        ).covers(self.digit_count):
            raise ValueError(
                f"adc_bits={self.adc_bits} cannot hold worst-case sums for "
                f"this geometry"
            )

    @property
    def adc(self) -> AdcConfig:
        if self.adc_bits is None:
            return AdcConfig.for_geometry(self.digit_bits, self.digit_count)
        return AdcConfig(self.adc_bits, self.digit_bits)

    @property
    def success_threshold(self) -> Fraction:
        return Fraction(1, 1 << self.operand_bits)

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, object]) -> "SimulationConfig":
        """Build from flat string keys (the config-file vocabulary)."""
        known = {
            "n", "m", "k", "noise_kind", "write_noise", "input_noise",
            "chain_noise", "trials", "seed", "adc_bits",
        }
        unknown = set(mapping) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        missing = {"m", "k"} - set(mapping)
        if missing:
            raise ValueError(f"missing config keys: {sorted(missing)}")
        m = int(str(mapping["m"]))
        k = int(str(mapping["k"]))
        n = int(str(mapping.get("n", m * k)))
        noise = NoiseModel(
            write_noise=parse_magnitude(mapping.get("write_noise", 0)),
            input_noise=parse_magnitude(mapping.get("input_noise", 0)),
            chain_noise=parse_magnitude(mapping.get("chain_noise", 0)),
            kind=str(mapping.get("noise_kind", "uniform")),
        )
        seed = mapping.get("seed")
        adc_bits = mapping.get("adc_bits")
        return cls(
            operand_bits=n,
            digit_bits=m,
            digit_count=k,
            noise=noise,
            trials=int(str(mapping.get("trials", 1))),
            seed=None if seed is None else int(str(seed)),
            adc_bits=None if adc_bits is None else int(str(adc_bits)),
        )


def load_config(path: str | Path) -> SimulationConfig:
    """Read the flat ``key = value`` config format (# starts a comment)."""
    mapping: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        mapping[key.strip()] = value.strip()
    return SimulationConfig.from_mapping(mapping)


@dataclass(frozen=True)
class TrialReport:
    """One multiplication experiment, compared against the exact oracle."""

    x: FixedPointValue
    y: FixedPointValue
    z_hat: FixedPointValue | None
    z_exact: FixedPointValue
    abs_error: Fraction | None
    success: bool
    fault: str | None = None


@dataclass(frozen=True)
class SweepReport:
    """Aggregate of a Monte Carlo sweep."""

    trials: int
    successes: int
    success_rate: float
    max_error: Fraction
    faults: int
    rows: tuple[TrialReport, ...]


@dataclass(frozen=True)
class MarginReport:
    """Worst-case accumulated readout error against the recovery threshold.

    ``accumulated_bound`` is ``k * (dw + dx + dw*dx)``: up to k digit pairs
    land in one column, and each contributes at most ``dw + dx + dw*dx``
    when conductance and input amplitudes (both < 1) are perturbed by at
    most dw and dx.  Recovery is guaranteed while that bound stays below
    half the converter grid.  ``effective_bits`` counts the fraction bits
    of a column sum the noise still leaves trustworthy; all but the low
    ``digit_bits`` of them travel through the carry field.
    """

    digit_count: int
    digit_bits: int
    write_noise: Fraction
    input_noise: Fraction
    delta_total: Fraction
    accumulated_bound: Fraction
    half_grid: Fraction
    feasible: bool
    effective_bits: int | None
    extractable_carry_bits: int | None


def _as_fixed(value, operand_bits: int) -> FixedPointValue:
    if isinstance(value, FixedPointValue):
        if value.frac_bits > operand_bits:
            raise ValueError(
                f"operand has {value.frac_bits} fractional bits, "
                f"configuration allows {operand_bits}"
            )
        return value
    if isinstance(value, float):
        return FixedPointValue.from_float(value, operand_bits)
    return FixedPointValue.from_fraction(value, operand_bits)


def run_trial(
    x,
    y,
    config: SimulationConfig,
    seed: int | None = None,
    *,
    rng: np.random.Generator | None = None,
) -> TrialReport:
    """One end-to-end multiplication under the configured noise.

    Chain faults (saturation, carry overflow) are caught and reported, not
    raised: the trial still yields a report with ``success=False``.
    """
    x = _as_fixed(x, config.operand_bits)
    y = _as_fixed(y, config.operand_bits)
    noise = config.noise
    if rng is None and (noise.write_noise or noise.input_noise or noise.chain_noise):
        rng = np.random.default_rng(noise.seed if seed is None else seed)
    xd = decompose(x, config.digit_bits, config.digit_count)
    yd = decompose(y, config.digit_bits, config.digit_count)
    programmed = program_array(build_multiplier_layout(yd), noise, rng)
    sums = analog_mac(programmed, xd.normalized(), noise, rng)
    z_exact = exact_product(x, y)
    try:
        product = run_chain(sums, config.adc, noise, rng)
    except ChainFault as fault:
        return TrialReport(x, y, None, z_exact, None, False, fault=str(fault))
    z_hat = product.value()
    abs_error = abs(z_hat.as_fraction() - z_exact.as_fraction())
    return TrialReport(
        x, y, z_hat, z_exact, abs_error, abs_error <= config.success_threshold
    )


def run_sweep(
    config: SimulationConfig,
    csv_path: str | Path | IO[str] | None = None,
) -> SweepReport:
    """Monte Carlo sweep over uniformly random operand pairs on the n-bit grid.

    Requires an explicit master seed (no wall-clock seeding): trial ``i``
    draws its operands and noise from the stream keyed by (seed, i).
    """
    if config.seed is None:
        raise ValueError("a sweep requires an explicit seed")
    n = config.operand_bits
    rows = []
    for index in range(config.trials):
        rng = np.random.default_rng([config.seed, index])
        x = FixedPointValue(int(rng.integers(0, 1 << n)), n)
        y = FixedPointValue(int(rng.integers(0, 1 << n)), n)
        rows.append(run_trial(x, y, config, rng=rng))
    errors = [r.abs_error for r in rows if r.abs_error is not None]
    successes = sum(r.success for r in rows)
    report = SweepReport(
        trials=config.trials,
        successes=successes,
        success_rate=successes / config.trials,
        max_error=max(errors, default=Fraction(0)),
        faults=sum(r.fault is not None for r in rows),
        rows=tuple(rows),
    )
    if csv_path is not None:
        write_sweep_csv(report, csv_path)
    return report


def write_sweep_csv(report: SweepReport, destination: str | Path | IO[str]) -> None:
    """Emit one row per trial: decimal x, y, error plus the exact num/den pair.

    Faulted trials carry empty error fields.  Output is plain LF-terminated
    so identical sweeps are byte-identical files.
    """
    if isinstance(destination, (str, Path)):
        with open(destination, "w", newline="") as handle:
            write_sweep_csv(report, handle)
        return
    writer = csv.writer(destination, lineterminator="\n")
    writer.writerow(["x", "y", "error", "error_num", "error_den"])
    for row in report.rows:
        if row.abs_error is None:
            error, num, den = "", "", ""
        else:
            error = repr(float(row.abs_error))
            num, den = row.abs_error.numerator, row.abs_error.denominator
        writer.writerow([repr(float(row.x)), repr(float(row.y)), error, num, den])


def noise_margin(
    digit_count: int,
    digit_bits: int,
    write_noise,
    input_noise=0,
) -> MarginReport:
    """Exact worst-case margin arithmetic for a crossbar geometry."""
    k, m = int(digit_count), int(digit_bits)
    if k < 1 or m < 1:
        raise ValueError("digit_count and digit_bits must be positive")
    dw, dx = Fraction(write_noise), Fraction(input_noise)
    if dw < 0 or dx < 0:
        raise ValueError("noise magnitudes must be >= 0")
    delta_total = dw + dx + dw * dx
    bound = k * delta_total
    half_grid = Fraction(1, 1 << (2 * m + 1))
    if bound == 0:
        effective = carry_bits = None
    else:
        effective = 0
        while Fraction(1, 1 << (effective + 1)) >= bound:
            effective += 1
        carry_bits = max(effective - m, 0)
    return MarginReport(
        digit_count=k,
        digit_bits=m,
        write_noise=dw,
        input_noise=dx,
        delta_total=delta_total,
        accumulated_bound=bound,
        half_grid=half_grid,
        feasible=bound < half_grid,
        effective_bits=effective,
        extractable_carry_bits=carry_bits,
    )


# Built-in 8-bit walkthrough: two operands, their digit amplitudes, and the
# fixed perturbed values injected on every stored digit and input line.
DEMO_X = FixedPointValue(214, 8)  # 0.8359375
DEMO_Y = FixedPointValue(109, 8)  # 0.42578125
DEMO_X_NOISY = (0.7509, 0.2545, 0.2564, 0.5050)
DEMO_Y_NOISY = (0.2546, 0.5063, 0.7510, 0.2550)


@dataclass(frozen=True)
class DemoResult:
    """Everything the demo walkthrough prints."""

    report: TrialReport
    x_digits: DigitVector
    y_digits: DigitVector
    x_inputs: tuple[float, ...]
    y_programmed: tuple[float, ...]
    ideal_sums: tuple[int, ...]
    analog_sums: PartialSumsAnalog
    product: ProductDigits


def run_demo() -> DemoResult:
    """The 8-bit worked example: m=2, k=4, fixed sub-1% perturbations.

    Every stored digit and every input amplitude is off by up to 0.0063,
    yet the recovered product matches the exact oracle bit for bit.
    """
    config = SimulationConfig(operand_bits=8, digit_bits=2, digit_count=4)
    xd = decompose(DEMO_X, 2, 4)
    yd = decompose(DEMO_Y, 2, 4)
    matrix = ConductanceMatrix.banded(DEMO_Y_NOISY, digit_bits=2)
    sums = analog_mac(matrix, DEMO_X_NOISY)
    product = run_chain(sums, config.adc)
    z_hat = product.value()
    z_exact = exact_product(DEMO_X, DEMO_Y)
    abs_error = abs(z_hat.as_fraction() - z_exact.as_fraction())
    report = TrialReport(
        DEMO_X, DEMO_Y, z_hat, z_exact, abs_error,
        abs_error <= config.success_threshold,
    )
    return DemoResult(
        report=report,
        x_digits=xd,
        y_digits=yd,
        x_inputs=DEMO_X_NOISY,
        y_programmed=DEMO_Y_NOISY,
        ideal_sums=partial_sums_exact(xd, yd).values,
        analog_sums=sums,
        product=product,
    )
