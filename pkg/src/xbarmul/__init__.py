"""Simulator of a digit-sliced analog crossbar multiplier.

Fixed-point operands are cut into low-precision digits, one operand is
programmed into a banded conductance array, the other drives the rows, and
a chain of converters turns the noisy column sums back into the exact
double-width product.  The package also ships the single-device physics
model, a Monte Carlo experiment harness with a CLI, and a scikit-learn
style estimator wrapper.
"""

from .chain import (
    AdcConfig,
    CarryOverflowError,
    ChainFault,
    ChainStep,
    ProductDigits,
    SaturationError,
    chain_cell,
    quantize,
    run_chain,
)
from .crossbar import (
    ConductanceMatrix,
    NoiseModel,
    PartialSumsAnalog,
    analog_mac,
    build_multiplier_layout,
    general_mac,
    program_array,
)
from .device import (
    IvTrace,
    Memristor,
    ProgramResult,
    program_conductance,
    simulate_iv,
)
from .estimator import CrossbarMultiplier
from .fixedpoint import (
    DigitVector,
    FixedPointValue,
    PartialSumsExact,
    assemble_from_partials,
    band_width,
    decompose,
    exact_product,
    partial_sums_exact,
    recompose,
)
from .harness import (
    DemoResult,
    MarginReport,
    SimulationConfig,
    SweepReport,
    TrialReport,
    load_config,
    noise_margin,
    parse_magnitude,
    run_demo,
    run_sweep,
    run_trial,
    write_sweep_csv,
)

__all__ = [
    "AdcConfig",
    "CarryOverflowError",
    "ChainFault",
    "ChainStep",
    "ConductanceMatrix",
    "CrossbarMultiplier",
    "DemoResult",
    "DigitVector",
    "FixedPointValue",
    "IvTrace",
    "MarginReport",
    "Memristor",
    "NoiseModel",
    "PartialSumsAnalog",
    "PartialSumsExact",
    "ProductDigits",
    "ProgramResult",
    "SaturationError",
    "SimulationConfig",
    "SweepReport",
    "TrialReport",
    "analog_mac",
    "assemble_from_partials",
    "band_width",
    "build_multiplier_layout",
    "chain_cell",
    "decompose",
    "exact_product",
    "general_mac",
    "load_config",
    "noise_margin",
    "parse_magnitude",
    "partial_sums_exact",
    "program_array",
    "program_conductance",
    "quantize",
    "recompose",
    "run_chain",
    "run_demo",
    "run_sweep",
    "run_trial",
    "simulate_iv",
    "write_sweep_csv",
]

__version__ = "0.1.0"
