"""Device model: resistance mixture, Euler integration, write-verify loop."""

import math

import numpy as np
import pytest

from xbarmul import IvTrace, Memristor, program_conductance, simulate_iv


def make(w=0.0, **kw):
    return Memristor(w=w, **kw)


class TestResistance:
    def test_undoped_limit(self):
        assert make(w=0.0).resistance() == 160.0

    def test_doped_limit(self):
        assert make(w=1.0).resistance() == 1.0

    def test_midpoint_is_linear(self):
        assert make(w=0.5).resistance() == (1.0 + 160.0) / 2

    def test_monotone_decreasing_in_w(self):
        rs = [make(w=w).resistance() for w in np.linspace(0, 1, 11)]
        assert all(a > b for a, b in zip(rs, rs[1:]))

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            Memristor(r_on=100.0, r_off=10.0)
        with pytest.raises(ValueError):
            Memristor(w=2.0)
        with pytest.raises(ValueError):
            Memristor(d=0.0)


class TestStep:
    def test_zero_voltage_freezes_state(self):
        dev = make(w=0.25)
        dev.step(0.0, 1.0)
        assert dev.w == 0.25

    def test_positive_drive_grows_state(self):
        dev = make(w=0.25)
        before = dev.w
        dev.step(0.5, 0.01)
        assert dev.w > before

    def test_negative_drive_shrinks_state(self):
        dev = make(w=0.25)
        dev.step(-0.5, 0.01)
        assert dev.w < 0.25

    def test_saturates_at_full_doping(self):
        dev = make(w=0.9)
        for _ in range(10_000):
            dev.step(5.0, 1.0)
            if dev.w == dev.d:
                break
        assert dev.w == dev.d
        assert dev.resistance() == dev.r_on

    def test_monotone_under_fixed_polarity(self):
        dev = make(w=0.1)
        states = [dev.w]
        for _ in range(200):
            dev.step(0.3, 0.05)
            states.append(dev.w)
        assert states[-1] < dev.d  # no clipping engaged
        assert all(a < b for a, b in zip(states, states[1:]))

    def test_state_stays_bounded_under_random_drive(self):
        rng = np.random.default_rng(11)
        dev = make(w=0.5)
        for _ in range(2000):
            dev.step(float(rng.uniform(-5, 5)), float(rng.uniform(0.01, 2.0)))
            assert 0.0 <= dev.w <= dev.d

    def test_rejects_nonpositive_dt(self):
        with pytest.raises(ValueError):
            make().step(1.0, 0.0)


class TestSimulateIv:
    def test_pinched_at_origin(self):
        # sine with its zeros snapped to exact 0.0 (float sin(pi) is ~1e-16)
        def drive(t):
            return 0.0 if t % 4.0 == 0.0 else math.sin(2 * math.pi * t / 8.0)

        trace = simulate_iv(make(w=0.4), drive, 0.5, 64)
        zero_v = [i for v, i in zip(trace.v, trace.i) if v == 0.0]
        assert len(zero_v) >= 4
        assert all(i == 0.0 for i in zero_v)

    def test_every_sample_is_ohmic_instant(self):
        dev = make(w=0.3)
        trace = simulate_iv(dev, lambda t: 0.7 * math.sin(t), 0.01, 500)
        # i = v / R(w) at the recorded instant
        r = 1.0 * (trace.w / 1.0) + 160.0 * (1 - trace.w / 1.0)
        assert np.array_equal(trace.i, trace.v / r)

    def test_frozen_state_gives_straight_line(self):
        dev = Memristor(w=0.5, mu_v=1e-12)  # drift too slow to matter
        trace = simulate_iv(dev, lambda t: 0.9 * math.sin(t), 0.01, 400)
        slope = 1.0 / Memristor(w=0.5).resistance()
        np.testing.assert_allclose(trace.i, trace.v * slope, rtol=1e-9, atol=1e-15)

    def test_state_returns_after_full_period(self):
        # separable dynamics: zero net charge returns w exactly; the Euler
        # endpoint error is first order in dt (measured 3.8e-7 at dt=1e-3)
        dev = make(w=0.3)
        period = 8.0
        dt = 1e-3
        simulate_iv(
            dev, lambda t: 0.8 * math.sin(2 * math.pi * t / period), dt, int(period / dt)
        )
        assert abs(dev.w - 0.3) < 1e-5

    def test_time_axis_and_validation(self):
        trace = simulate_iv(make(), lambda t: 0.0, 0.25, 8)
        assert np.array_equal(trace.t, np.arange(8) * 0.25)
        with pytest.raises(ValueError):
            simulate_iv(make(), lambda t: 0.0, 0.25, 0)
        with pytest.raises(ValueError):
            IvTrace(np.array([0.0, 0.0]), np.zeros(2), np.zeros(2), np.zeros(2))

    def test_csv_round_trip(self, tmp_path):
        trace = simulate_iv(make(w=0.2), lambda t: math.sin(t), 0.1, 20)
        path = tmp_path / "trace.csv"
        trace.write_csv(str(path))
        lines = path.read_text().splitlines()
        assert lines[0] == "t,v,i,w"
        assert len(lines) == 21
        assert [float(c) for c in lines[1].split(",")] == [0.0, 0.0, 0.0, 0.2]


class TestProgramConductance:
    def test_worked_target_converges_within_tolerance(self):
        res = program_conductance(0.42578125, tolerance=2**-8, seed=5)
        assert res.converged
        assert abs(res.achieved - 0.42578125) <= 2**-8
        assert 0 < res.pulses <= 1000

    def test_boundary_target_is_immediate(self):
        res = program_conductance(0.0, seed=1)
        assert res.converged
        assert res.pulses == 0

    def test_zero_budget(self):
        res = program_conductance(0.5, max_pulses=0, seed=1)
        assert not res.converged
        assert res.pulses == 0

    def test_zero_tolerance_rejected(self):
        with pytest.raises(ValueError):
            program_conductance(0.5, tolerance=0.0)

    def test_target_validation(self):
        with pytest.raises(ValueError):
            program_conductance(1.5)

    def test_contract_over_random_targets(self):
        rng = np.random.default_rng(2024)
        converged = 0
        for trial in range(1000):
            target = float(rng.uniform())
            res = program_conductance(target, tolerance=2**-8, seed=trial)
            if res.converged:
                converged += 1
                assert abs(res.achieved - target) <= 2**-8
        assert converged >= 990

    def test_deterministic_per_seed(self):
        a = program_conductance(0.7, seed=99)
        b = program_conductance(0.7, seed=99)
        assert a == b

    def test_pulse_count_scales_with_distance(self):
        near = program_conductance(0.1, seed=0)
        far = program_conductance(0.9, seed=0)
        assert far.pulses > near.pulses

    def test_device_left_at_achieved_state(self):
        dev = Memristor()
        res = program_conductance(0.3, device=dev, seed=8)
        assert dev.normalized_conductance() == res.achieved
