"""Scikit-learn style front end for the simulated multiplier.

Programming an operand into the crossbar is the fit step: the digit
decomposition and the (write-noise perturbed) conductance array become the
fitted state.  Prediction drives the programmed array with each input
value and recovers the product through the carry chain, drawing fresh
input noise per read, exactly as re-using one physical array would.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .chain import AdcConfig, run_chain
from .crossbar import NoiseModel, analog_mac, build_multiplier_layout, program_array
from .fixedpoint import FixedPointValue, decompose


class CrossbarMultiplier(TransformerMixin, BaseEstimator):
    """Fixed-point multiplier backed by a simulated analog crossbar.

    Parameters
    ----------
    digit_bits : int
        Bits stored per cell (m).
    digit_count : int
        Cells per operand (k); operands carry ``digit_bits * digit_count``
        fraction bits.
    write_noise, input_noise, chain_noise : float
        Perturbation magnitudes for programming, input drive, and the
        chain's summing stages.
    noise_kind : {"uniform", "gaussian"}
        ``uniform`` draws are bounded by the magnitude; ``gaussian`` uses it
        as standard deviation.
    adc_bits : int or None
        Converter width override; ``None`` sizes it from the geometry.
    quantize_inputs : bool
        When True (default) operands are snapped to the nearest point of
        the n-bit grid, mirroring an n-bit DAC.  When False, values off the
        grid raise ``ValueError`` instead.
    random_state : int or None
        Seeds the noise stream; write noise is drawn once at fit time,
        input noise on every predict call.

    Examples
    --------
    >>> mult = CrossbarMultiplier(digit_bits=2, digit_count=4).fit(0.42578125)
    >>> mult.predict([0.8359375])
    array([0.35592651])
    """

    def __init__(
        self,
        digit_bits: int = 2,
        digit_count: int = 4,
        write_noise: float = 0.0,
        input_noise: float = 0.0,
        chain_noise: float = 0.0,
        noise_kind: str = "uniform",
        adc_bits: int | None = None,
        quantize_inputs: bool = True,
        random_state: int | None = None,
    ):
        self.digit_bits = digit_bits
        self.digit_count = digit_count
        self.write_noise = write_noise
        self.input_noise = input_noise
        self.chain_noise = chain_noise
        self.noise_kind = noise_kind
        self.adc_bits = adc_bits
        self.quantize_inputs = quantize_inputs
        self.random_state = random_state

    @property
    def operand_bits(self) -> int:
        return self.digit_bits * self.digit_count

    def _noise_model(self) -> NoiseModel:
        return NoiseModel(
            write_noise=self.write_noise,
            input_noise=self.input_noise,
            chain_noise=self.chain_noise,
            kind=self.noise_kind,
            seed=self.random_state,
        )

    def _to_fixed(self, value: float) -> FixedPointValue:
        n = self.operand_bits
        if not 0.0 <= value < 1.0:
            raise ValueError(f"operands must lie in [0, 1), got {value}")
        if self.quantize_inputs:
            numerator = min(int(np.floor(value * (1 << n) + 0.5)), (1 << n) - 1)
            return FixedPointValue(numerator, n)
        return FixedPointValue.from_float(float(value), n)

    @staticmethod
    def _scalar(X) -> float:
        arr = np.asarray(X, dtype=float).ravel()
        if arr.size != 1:
            raise ValueError(f"expected a single operand, got {arr.size} values")
        return float(arr[0])

    def fit(self, X, y=None) -> "CrossbarMultiplier":
        """Program the operand ``X`` (scalar or single-element array)."""
        if self.digit_bits < 1 or self.digit_count < 1:
            raise ValueError("digit_bits and digit_count must be >= 1")
        noise = self._noise_model()
        self._rng = np.random.default_rng(self.random_state)
        self.operand_ = self._to_fixed(self._scalar(X))
        self.digits_ = decompose(self.operand_, self.digit_bits, self.digit_count)
        self.conductance_ = program_array(
            build_multiplier_layout(self.digits_), noise, self._rng
        )
        self.adc_ = (
            AdcConfig.for_geometry(self.digit_bits, self.digit_count)
            if self.adc_bits is None
            else AdcConfig(self.adc_bits, self.digit_bits)
        )
        self.n_features_in_ = 1
        return self

    def multiply(self, value: float) -> FixedPointValue:
        """Exact recovered product for one input value (full 2n-bit result)."""
        check_is_fitted(self)
        fixed = self._to_fixed(float(value))
        digits = decompose(fixed, self.digit_bits, self.digit_count)
        noise = self._noise_model()
        sums = analog_mac(self.conductance_, digits.normalized(), noise, self._rng)
        return run_chain(sums, self.adc_, noise, self._rng).value()

    def predict(self, X) -> np.ndarray:
        """Products as floats, one per input value."""
        check_is_fitted(self)
        arr = np.asarray(X, dtype=float)
        flat = arr.ravel()
        out = np.array([float(self.multiply(v)) for v in flat])
        return out.reshape(arr.shape)

    def transform(self, X) -> np.ndarray:
        """Alias of :meth:`predict`: scale inputs by the programmed operand."""
        return self.predict(X)
