"""Crossbar layout, write/input noise, and the analog multiply-accumulate."""

import numpy as np
import pytest

from xbarmul import (
    ConductanceMatrix,
    DigitVector,
    NoiseModel,
    analog_mac,
    band_width,
    build_multiplier_layout,
    general_mac,
    partial_sums_exact,
    program_array,
)

# perturbed values from the 8-bit walkthrough (all offsets <= 0.0063/0.0064)
X_NOISY = (0.7509, 0.2545, 0.2564, 0.5050)
Y_NOISY = (0.2546, 0.5063, 0.7510, 0.2550)


class TestLayout:
    def test_two_digit_band(self):
        layout = build_multiplier_layout(DigitVector((1, 1), 1))
        # digits 1,1 at 1 bit -> amplitudes 0.5, 0.5
        np.testing.assert_array_equal(
            layout.values, [[0.5, 0.5, 0.0], [0.0, 0.5, 0.5]]
        )
        np.testing.assert_array_equal(
            layout.programmed, [[True, True, False], [False, True, True]]
        )

    def test_shifted_rows_hold_same_sequence(self):
        m = ConductanceMatrix.banded((0.5, 0.25))
        np.testing.assert_array_equal(m.values, [[0.5, 0.25, 0.0], [0.0, 0.5, 0.25]])

    def test_single_cell(self):
        layout = build_multiplier_layout(DigitVector((1,), 2))
        assert layout.values.shape == (1, 1)
        assert layout.values[0, 0] == 0.25

    def test_band_structure_everywhere(self):
        layout = build_multiplier_layout(DigitVector((1, 2, 3, 1), 2))
        k = layout.rows
        assert (k, layout.cols) == (4, 7)
        for i in range(k):
            for c in range(layout.cols):
                inside = i <= c <= i + k - 1
                assert layout.programmed[i, c] == inside

    def test_open_cells_must_be_zero(self):
        with pytest.raises(ValueError):
            ConductanceMatrix([[0.5, 0.1, 0.0], [0.0, 0.5, 0.5]],
                              [[True, True, False], [False, True, True]])
        ConductanceMatrix([[0.5, 0.0, 0.0], [0.0, 0.5, 0.5]],
                          [[True, True, False], [False, True, True]])

    def test_out_of_band_programming_rejected(self):
        with pytest.raises(ValueError):
            ConductanceMatrix([[0.5, 0.5, 0.5], [0.0, 0.5, 0.5]],
                              [[True, True, True], [False, True, True]])

    def test_values_clamped_to_unit_interval(self):
        with pytest.raises(ValueError):
            ConductanceMatrix.banded((1.5,))


class TestProgramArray:
    def test_zero_noise_is_identity(self):
        layout = build_multiplier_layout(DigitVector((1, 2, 3, 1), 2))
        assert program_array(layout, NoiseModel()) == layout

    def test_uniform_noise_is_bounded_per_cell(self):
        layout = build_multiplier_layout(DigitVector((1, 2, 3, 1), 2))
        noise = NoiseModel(write_noise=0.0063)
        for seed in range(20):
            noisy = program_array(layout, noise, np.random.default_rng(seed))
            eps = noisy.values[layout.programmed] - layout.values[layout.programmed]
            assert np.abs(eps).max() <= 0.0063
            assert noisy.digit_bits == layout.digit_bits
            np.testing.assert_array_equal(noisy.programmed, layout.programmed)

    def test_uniform_noise_statistics(self):
        # 1e5 draws: max |eps| bounded by 2^-8, mean |eps| near 2^-9
        layout = ConductanceMatrix.banded([0.5] * 250)
        noise = NoiseModel(write_noise=2**-8)
        rng = np.random.default_rng(123)
        eps = []
        for _ in range(2):
            noisy = program_array(layout, noise, rng)
            eps.append(noisy.values[layout.programmed] - 0.5)
        eps = np.concatenate(eps)
        assert len(eps) >= 100_000
        assert np.abs(eps).max() <= 2**-8
        assert np.mean(np.abs(eps)) == pytest.approx(2**-9, rel=0.02)

    def test_open_cells_never_receive_noise(self):
        layout = build_multiplier_layout(DigitVector((3, 3), 2))
        noisy = program_array(layout, NoiseModel(write_noise=0.3),
                              np.random.default_rng(0))
        assert (noisy.values[~layout.programmed] == 0.0).all()

    def test_results_clipped_to_unit_interval(self):
        layout = ConductanceMatrix.banded((1.0, 0.0))
        noisy = program_array(layout, NoiseModel(write_noise=0.5),
                              np.random.default_rng(5))
        assert noisy.values.min() >= 0.0
        assert noisy.values.max() <= 1.0

    def test_deterministic_per_seed(self):
        layout = build_multiplier_layout(DigitVector((1, 2, 3, 1), 2))
        noise = NoiseModel(write_noise=2**-8, seed=77)
        a = program_array(layout, noise)
        b = program_array(layout, noise)
        np.testing.assert_array_equal(a.values, b.values)


class TestAnalogMac:
    def test_zero_noise_matches_integer_convolution(self):
        xd = DigitVector((3, 1, 1, 2), 2)
        yd = DigitVector((1, 2, 3, 1), 2)
        layout = build_multiplier_layout(yd)
        sums = analog_mac(layout, xd.normalized())
        expected = [v / 16 for v in partial_sums_exact(xd, yd).values]
        assert list(sums.values) == expected  # bit-exact, not approximate
        assert expected == [0.1875, 0.4375, 0.75, 0.625, 0.5, 0.4375, 0.125]

    def test_zero_inputs_zero_outputs(self):
        layout = build_multiplier_layout(DigitVector((3, 2, 1), 2))
        sums = analog_mac(layout, [0.0, 0.0, 0.0], NoiseModel())
        assert (sums.values == 0.0).all()

    def test_worked_noisy_vectors_stay_inside_rounding_margin(self):
        matrix = ConductanceMatrix.banded(Y_NOISY, digit_bits=2)
        sums = analog_mac(matrix, X_NOISY)
        ideal = partial_sums_exact(
            DigitVector((3, 1, 1, 2), 2), DigitVector((1, 2, 3, 1), 2)
        )
        err = np.abs(sums.values - np.array(ideal.values) / 16)
        assert err.max() < 2**-5

    def test_length_mismatch_rejected(self):
        layout = build_multiplier_layout(DigitVector((1, 2), 2))
        with pytest.raises(ValueError):
            analog_mac(layout, [0.5], NoiseModel())

    def test_input_range_validated(self):
        layout = build_multiplier_layout(DigitVector((1,), 2))
        with pytest.raises(ValueError):
            analog_mac(layout, [1.5], NoiseModel())

    def test_deterministic_per_seed(self):
        layout = build_multiplier_layout(DigitVector((1, 2, 3, 1), 2))
        noise = NoiseModel(write_noise=2**-8, input_noise=2**-8, seed=4)
        a = analog_mac(layout, (0.75, 0.25, 0.25, 0.5), noise)
        b = analog_mac(layout, (0.75, 0.25, 0.25, 0.5), noise)
        assert np.array_equal(a.values, b.values)

    def test_column_offset_hook(self):
        layout = build_multiplier_layout(DigitVector((1,), 1))
        plain = analog_mac(layout, [0.5])
        shifted = analog_mac(layout, [0.5], column_offset=[0.125])
        assert shifted.values[0] == plain.values[0] + 0.125

    def test_readout_error_bound(self):
        # |readout - exact| <= band_width * (dw + dx + dw*dx) per column
        rng = np.random.default_rng(31337)
        for _ in range(200):
            m = int(rng.integers(1, 4))
            k = int(rng.integers(1, 9))
            dw = float(rng.uniform(0, 0.02))
            dx = float(rng.uniform(0, 0.02))
            xd = DigitVector(rng.integers(0, 1 << m, k), m)
            yd = DigitVector(rng.integers(0, 1 << m, k), m)
            noise = NoiseModel(write_noise=dw, input_noise=dx)
            noisy = program_array(build_multiplier_layout(yd), noise, rng)
            sums = analog_mac(noisy, xd.normalized(), noise, rng)
            exact = np.array(partial_sums_exact(xd, yd).values) / (1 << 2 * m)
            term = dw + dx + dw * dx
            caps = np.array([band_width(j, k) for j in range(2 * k - 1)]) * term
            assert (np.abs(sums.values - exact) <= caps + 1e-12).all()


class TestGeneralMac:
    def test_identity_pattern_passes_through(self):
        g = np.eye(4)
        x = np.array([0.1, 0.4, 0.7, 1.0])
        np.testing.assert_array_equal(general_mac(g, x), x)

    def test_scalar_case(self):
        assert general_mac([[0.5]], [0.5])[0] == 0.25

    def test_matches_dense_oracle(self):
        rng = np.random.default_rng(9)
        g = rng.uniform(0, 1, (3, 3))
        x = rng.uniform(0, 1, 3)
        np.testing.assert_array_equal(general_mac(g, x), x @ g)

    def test_banded_readout_is_special_case(self):
        yd = DigitVector((1, 2, 3, 1), 2)
        layout = build_multiplier_layout(yd)
        x = (0.75, 0.25, 0.25, 0.5)
        np.testing.assert_array_equal(
            general_mac(layout, x), analog_mac(layout, x).values
        )

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            general_mac(np.eye(3), [0.5, 0.5])


class TestNoiseModel:
    def test_validation(self):
        with pytest.raises(ValueError):
            NoiseModel(kind="lognormal")
        with pytest.raises(ValueError):
            NoiseModel(write_noise=-0.1)

    def test_gaussian_kind_is_unbounded_law(self):
        noise = NoiseModel(write_noise=0.01, kind="gaussian")
        draws = noise.draw(np.random.default_rng(0), 0.01, 100_000)
        assert np.std(draws) == pytest.approx(0.01, rel=0.02)
        assert np.abs(draws).max() > 0.01  # tails exceed the magnitude
