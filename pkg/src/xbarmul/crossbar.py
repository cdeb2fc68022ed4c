"""Banded conductance layout and the noisy analog multiply-accumulate.

One operand's digits are stored along the diagonals of a k x (2k-1) array:
row ``i`` holds the full digit sequence shifted to columns ``i .. i+k-1``,
every other cross-point is left open.  Driving the rows with the second
operand's digit amplitudes makes column ``c`` collect exactly the
convolution slot ``sum(x[p] * y[q] for p + q == c)``, read out through an
ideal unit-gain transimpedance stage.

Conductances live in normalized digit units [0, 1]; mapping to siemens
through the device model is a separate optional step.  Write noise
perturbs programmed cells once at program time, input noise perturbs the
drive amplitudes once per read.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fixedpoint import DigitVector

NOISE_KINDS = ("uniform", "gaussian")


@dataclass(frozen=True)
class NoiseModel:
    """Magnitudes of the three independent perturbation sources.

    ``uniform`` draws are bounded: |eps| <= magnitude exactly.  ``gaussian``
    uses the magnitude as standard deviation.  A magnitude of zero draws
    nothing, so the zero-noise path is bit-exact.
    """

    write_noise: float = 0.0
    input_noise: float = 0.0
    chain_noise: float = 0.0
    kind: str = "uniform"
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"kind must be one of {NOISE_KINDS}, got {self.kind!r}")
        for name in ("write_noise", "input_noise", "chain_noise"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    def make_rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    def draw(self, rng: np.random.Generator, magnitude: float, size: int) -> np.ndarray:
        if self.kind == "uniform":
            return rng.uniform(-magnitude, magnitude, size)
        return rng.normal(0.0, magnitude, size)


class ConductanceMatrix:
    """Normalized conductances with an explicit open-cell mask.

    The layout is banded: row ``i`` may only be programmed in columns
    ``i .. i + k - 1`` of the ``k x (2k-1)`` grid.  Open cells carry no
    conductance, contribute zero current, and never receive write noise,
    which is what distinguishes them from cells programmed to zero.
    """

    def __init__(
        self,
        values: np.ndarray | Sequence[Sequence[float]],
        programmed: np.ndarray | Sequence[Sequence[bool]],
        digit_bits: int | None = None,
    ):
        values = np.array(values, dtype=float)
        programmed = np.array(programmed, dtype=bool)
        if values.ndim != 2 or values.shape != programmed.shape:
            raise ValueError("values and programmed mask must be equal 2-D shapes")
        rows, cols = values.shape
        if cols != 2 * rows - 1:
            raise ValueError(f"expected {2 * rows - 1} columns for {rows} rows, got {cols}")
        for i in range(rows):
            outside = np.concatenate([programmed[i, :i], programmed[i, i + rows:]])
            if outside.any():
                raise ValueError(f"row {i} programmed outside its band")
        if values[~programmed].any():
            raise ValueError("open cells must carry exactly zero")
        if ((values < 0) | (values > 1)).any():
            raise ValueError("programmed values must lie in [0, 1]")
        values.setflags(write=False)
        programmed.setflags(write=False)
        self.values = values
        self.programmed = programmed
        self.digit_bits = digit_bits

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    @classmethod
    def banded(
        cls, cell_values: Sequence[float], digit_bits: int | None = None
    ) -> "ConductanceMatrix":
        """Place one digit sequence on every row, shifted one column per row."""
        cell_values = tuple(float(v) for v in cell_values)
        k = len(cell_values)
        if k < 1:
            raise ValueError("need at least one cell value")
        values = np.zeros((k, 2 * k - 1))
        programmed = np.zeros((k, 2 * k - 1), dtype=bool)
        for i in range(k):
            values[i, i : i + k] = cell_values
            programmed[i, i : i + k] = True
        return cls(values, programmed, digit_bits)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, ConductanceMatrix):
            return (
                np.array_equal(self.values, other.values)
                and np.array_equal(self.programmed, other.programmed)
                and self.digit_bits == other.digit_bits
            )
        return NotImplemented


@dataclass(frozen=True)
class PartialSumsAnalog:
    """Column readouts (normalized currents) of one crossbar read."""

    values: np.ndarray
    digit_bits: int
    digit_count: int

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if len(values) != 2 * self.digit_count - 1:
            raise ValueError(
                f"expected {2 * self.digit_count - 1} columns, got {len(values)}"
            )


def build_multiplier_layout(yd: DigitVector) -> ConductanceMatrix:
    """Ideal (noise-free) banded layout holding one operand's digit amplitudes."""
    return ConductanceMatrix.banded(yd.normalized(), yd.digit_bits)


def program_array(
    ideal: ConductanceMatrix,
    noise: NoiseModel,
    rng: np.random.Generator | None = None,
) -> ConductanceMatrix:
    """Apply one independent write-noise draw to every programmed cell.

    Open cells stay exactly zero; results are clipped to [0, 1].  With zero
    write noise the ideal array is returned unchanged (no draws consumed).
    """
    if noise.write_noise == 0:
        return ideal
    if rng is None:
        rng = noise.make_rng()
    values = np.array(ideal.values)
    mask = ideal.programmed
    eps = noise.draw(rng, noise.write_noise, int(mask.sum()))
    values[mask] = np.clip(values[mask] + eps, 0.0, 1.0)
    return ConductanceMatrix(values, mask, ideal.digit_bits)


def general_mac(
    g: ConductanceMatrix | np.ndarray | Sequence[Sequence[float]],
    x: Sequence[float] | np.ndarray,
    noise: NoiseModel | None = None,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Noisy analog matrix-vector product: rows are driven, columns are read.

    ``out[c] = sum_i (x[i] + eps_i) * g[i][c]`` with one input perturbation
    per row per read.  The banded multiplier readout is the special case
    ``general_mac(build_multiplier_layout(yd), xd.normalized(), ...)``.
    """
    values = g.values if isinstance(g, ConductanceMatrix) else np.asarray(g, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or values.ndim != 2 or len(x) != values.shape[0]:
        raise ValueError(
            f"input length {x.shape} does not match matrix rows {values.shape}"
        )
    if ((x < 0) | (x > 1)).any():
        raise ValueError("input amplitudes must lie in [0, 1]")
    if noise is not None and noise.input_noise != 0:
        if rng is None:
            rng = noise.make_rng()
        x = x + noise.draw(rng, noise.input_noise, len(x))
    return x @ values


def analog_mac(
    g: ConductanceMatrix,
    x_inputs: Sequence[float] | np.ndarray,
    noise: NoiseModel | None = None,
    rng: np.random.Generator | None = None,
    *,
    digit_bits: int | None = None,
    column_offset: Sequence[float] | np.ndarray | None = None,
) -> PartialSumsAnalog:
    """Read all convolution slots of a programmed multiplier array.

    ``column_offset`` is an optional additive per-column term for op-amp
    offset sensitivity studies; the default models ideal unit-gain
    transimpedance stages.
    """
    m = digit_bits if digit_bits is not None else g.digit_bits
    if m is None:
        raise ValueError("digit_bits unknown: set it on the matrix or pass it explicitly")
    out = general_mac(g, x_inputs, noise, rng)
    if column_offset is not None:
        offset = np.asarray(column_offset, dtype=float)
        if offset.shape != out.shape:
            raise ValueError(f"column offset shape {offset.shape} != {out.shape}")
        out = out + offset
    return PartialSumsAnalog(out, m, g.rows)
