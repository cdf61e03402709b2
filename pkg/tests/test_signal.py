import math

import numpy as np
import pytest

from qvolt.model import NonlinearParams
from qvolt.signal import (
    AcquisitionConfig,
    AcquisitionMode,
    CycleReading,
    VoltageRange,
    fast_reading,
    read_readings,
    reduce_cycle,
    run_acquisition,
    synthesize_cycle,
    write_readings,
)

QUIET = AcquisitionConfig(sigma_low=0.0, sigma_high=0.0)


def lstsq_midpoint_oracle(window, rate):
    """Independent reduction oracle: explicit normal equations, evaluated at mean t."""
    t = np.arange(len(window)) / rate
    design = np.array([[len(t), t.sum()], [t.sum(), (t * t).sum()]])
    rhs = np.array([window.sum(), (t * window).sum()])
    b, a = np.linalg.solve(design, rhs)
    return a * t.mean() + b


class TestAcquisitionConfig:
    def test_rejects_window_longer_than_cycle(self):
        with pytest.raises(ValueError):
            AcquisitionConfig(cycle_duration=1.0, record_window=2.0)

    def test_rejects_insufficient_settling(self):
        with pytest.raises(ValueError):
            AcquisitionConfig(cycle_duration=1.001, record_window=1.0, filter_tau=1e-3)

    def test_rejects_single_sample_window(self):
        with pytest.raises(ValueError):
            AcquisitionConfig(sample_rate=1.0, record_window=1.0)

    def test_range_is_pure_threshold(self):
        cfg = AcquisitionConfig()
        assert cfg.range_for(1.0) is VoltageRange.SENSITIVE
        assert cfg.range_for(1.0 + 1e-12) is VoltageRange.INSENSITIVE
        assert cfg.range_for(-0.3e-9) is VoltageRange.SENSITIVE
        assert cfg.range_for(3.0) is VoltageRange.INSENSITIVE


class TestSynthesizeCycle:
    def test_steady_state_is_constant(self, rng):
        block = synthesize_cycle(0.7, 0.7, QUIET, rng)
        assert np.all(block == 0.7)
        assert len(block) == QUIET.n_cycle_samples

    def test_settling_decays_to_double_precision(self, rng):
        block = synthesize_cycle(0.0, 3.0, QUIET, rng)
        # sample at t = 1 s: transient is 3 * exp(-1000), below double resolution
        i = round(1.0 * QUIET.sample_rate)
        assert block[i] == 3.0

    def test_pure_drift(self, rng):
        cfg = AcquisitionConfig(sigma_low=0.0, sigma_high=0.0, drift_rate=1e-9)
        block = synthesize_cycle(0.0, 0.0, cfg, rng)
        i = 1500
        t = i / cfg.sample_rate
        assert block[i] == pytest.approx(1e-9 * t, rel=1e-15)

    def test_settling_margin_at_window_start(self, rng):
        # residual transient at the start of the record window is e^-1000 suppressed
        cfg = AcquisitionConfig(sigma_low=0.0, sigma_high=0.0, drift_rate=2e-9)
        block = synthesize_cycle(3.0, 0.0, cfg, rng)
        i0 = cfg.n_cycle_samples - cfg.n_window_samples
        t0 = i0 / cfg.sample_rate
        assert block[i0] == pytest.approx(2e-9 * t0, abs=1e-300)


class TestReduceCycle:
    def test_constant_block(self):
        block = np.full(QUIET.n_cycle_samples, 0.42)
        assert reduce_cycle(block, QUIET) == pytest.approx(0.42, rel=1e-15)

    def test_odd_symmetric_drift_cancels(self):
        n = QUIET.n_cycle_samples
        t = np.arange(n) / QUIET.sample_rate
        nw = QUIET.n_window_samples
        t_mid = (t[-nw:]).mean()
        block = 5.0 * (t - t_mid) + 0.123
        assert reduce_cycle(block, QUIET) == pytest.approx(0.123, rel=1e-12)

    def test_matches_normal_equations_oracle(self, rng):
        block = synthesize_cycle(0.0, 1.5, AcquisitionConfig(sigma_low=1e-3), rng)
        expected = lstsq_midpoint_oracle(block[-QUIET.n_window_samples:], QUIET.sample_rate)
        assert reduce_cycle(block, QUIET) == pytest.approx(expected, rel=1e-12)

    def test_detrend_invariance_randomized(self, rng):
        nw = QUIET.n_window_samples
        t = np.arange(QUIET.n_cycle_samples) / QUIET.sample_rate
        t_mid = t[-nw:].mean()
        for _ in range(200):
            block = rng.normal(0.5, 0.1, QUIET.n_cycle_samples)
            a = rng.uniform(-1.0, 1.0)
            base = reduce_cycle(block, QUIET)
            shifted = reduce_cycle(block + a * (t - t_mid), QUIET)
            assert abs(shifted - base) < 1e-12 * max(1.0, abs(base))

    def test_rejects_short_block(self):
        with pytest.raises(ValueError):
            reduce_cycle(np.array([1.0]), QUIET)


class TestFastReading:
    def test_degenerate_sigma(self, rng):
        assert fast_reading(-0.306e-9, 0.0, rng) == -0.306e-9

    def test_gaussian_mean(self):
        rng = np.random.default_rng(3)
        n = 10_000
        draws = [fast_reading(3.0, 1.8e-4, rng) for _ in range(n)]
        assert abs(np.mean(draws) - 3.0) < 5 * 1.8e-4 / math.sqrt(n)

    def test_deterministic_under_seed(self):
        a = fast_reading(1.0, 0.1, np.random.default_rng(5))
        b = fast_reading(1.0, 0.1, np.random.default_rng(5))
        assert a == b

    def test_rejects_negative_sigma(self, rng):
        with pytest.raises(ValueError):
            fast_reading(0.0, -1.0, rng)


class TestRunAcquisition:
    def test_noiseless_ideal(self):
        params = NonlinearParams(eps_gamma=0.0, vs=0.0)
        readings = run_acquisition([0, 1, 0, 1], [0.5] * 4, params, QUIET, noise_seed=1)
        values = [r.reading for r in readings]
        assert values == [0.0, 3.0, 0.0, 3.0]
        assert [r.range for r in readings] == [
            VoltageRange.SENSITIVE,
            VoltageRange.INSENSITIVE,
            VoltageRange.SENSITIVE,
            VoltageRange.INSENSITIVE,
        ]

    def test_injected_shift_noiseless(self):
        params = NonlinearParams(eps_gamma=1e-9, vs=0.0)
        readings = run_acquisition([0, 0], [0.99, 0.99], params, QUIET, noise_seed=1)
        for r in readings:
            assert r.reading == pytest.approx(1.47e-9, rel=1e-12)

    def test_one_reading_per_bit_at_paper_scale(self):
        n = 100_717
        bits = np.zeros(n, dtype=np.uint8)
        bits[1::2] = 1
        params = NonlinearParams(eps_gamma=0.0, vs=0.0)
        readings = run_acquisition(bits, np.full(n, 0.5), params, QUIET, noise_seed=2)
        assert len(readings) == n
        assert [r.blinded_index for r in readings[:3]] == [0, 1, 2]

    def test_rejects_length_mismatch(self):
        with pytest.raises(ValueError):
            run_acquisition([0, 1], [0.5], NonlinearParams(), QUIET, noise_seed=1)

    def test_fast_and_waveform_modes_agree(self):
        # matched (expected, per-reading sigma): mean within 5 SEM, sd within 10%
        n = 10_000
        bits = np.zeros(n, dtype=np.uint8)
        fids = np.full(n, 0.5)
        params = NonlinearParams(eps_gamma=0.0, vs=-0.306e-9)
        fast_cfg = AcquisitionConfig(mode=AcquisitionMode.FAST, sigma_low=3.4e-9)
        wave_cfg = AcquisitionConfig(mode=AcquisitionMode.WAVEFORM, sigma_low=3.4e-9)
        fast = np.array(
            [r.reading for r in run_acquisition(bits, fids, params, fast_cfg, 3)]
        )
        wave = np.array(
            [r.reading for r in run_acquisition(bits, fids, params, wave_cfg, 4)]
        )
        sem = 3.4e-9 / math.sqrt(n)
        assert abs(fast.mean() - wave.mean()) < 5 * math.sqrt(2) * sem
        assert abs(wave.std(ddof=1) / fast.std(ddof=1) - 1) < 0.10

    def test_drift_offsets_both_modes_equally(self):
        bits = np.array([0, 1, 0], dtype=np.uint8)
        fids = np.full(3, 0.5)
        params = NonlinearParams(eps_gamma=0.0, vs=0.0)
        for mode in AcquisitionMode:
            cfg = AcquisitionConfig(
                mode=mode, sigma_low=0.0, sigma_high=0.0, drift_rate=1e-9
            )
            readings = run_acquisition(bits, fids, params, cfg, 5)
            # drift evaluated at the window midpoint
            expected = 1e-9 * cfg.window_mid_time
            assert readings[0].reading == pytest.approx(expected, rel=1e-9)
            assert readings[2].reading == pytest.approx(expected, rel=1e-9)


class TestReadingsFile:
    def test_round_trip(self, tmp_path):
        readings = [
            CycleReading(0, -0.306e-9, VoltageRange.SENSITIVE),
            CycleReading(1, 3.0000001, VoltageRange.INSENSITIVE),
        ]
        path = tmp_path / "readings.csv"
        write_readings(readings, path)
        back = read_readings(path)
        assert back == readings

    def test_rejects_bad_header(self, tmp_path):
        path = tmp_path / "readings.csv"
        path.write_text("nope\n1,2,sensitive\n")
        with pytest.raises(ValueError):
            read_readings(path)
