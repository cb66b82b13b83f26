import math

import numpy as np
import pytest

from blinkbench import (
    Recording,
    add_noise_at_snr,
    gaussianity_stats,
    highpass,
    lowpass,
    pearson,
    quantization_noise_rms,
    rms,
    sine_max_excursion,
    snr_db,
)


def pearson_oracle(x, y):
    """Plain product-moment formula, evaluated term by term."""
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    return sxy / math.sqrt(sxx * syy)


class TestPearson:
    def test_self_correlation(self):
        x = np.array([0.3, -1.2, 4.0, 2.2, -0.7])
        assert pearson(x, x) == 1.0

    def test_sign_flip(self):
        x = np.array([0.3, -1.2, 4.0, 2.2, -0.7])
        assert pearson(x, -x) == -1.0

    def test_known_value(self):
        x = [1.0, 2.0, 3.0, 4.0]
        y = [1.0, 2.0, 3.0, 5.0]
        expected = pearson_oracle(x, y)
        assert expected == pytest.approx(0.9827076298239908, abs=1e-12)
        assert pearson(x, y) == pytest.approx(expected, abs=1e-12)
        assert pearson(x, y) == pytest.approx(0.9827, abs=5e-5)

    def test_symmetry(self):
        rng = np.random.default_rng(0)
        x, y = rng.standard_normal((2, 50))
        assert pearson(x, y) == pytest.approx(pearson(y, x), abs=1e-15)

    def test_affine_invariance(self):
        rng = np.random.default_rng(1)
        for _ in range(25):
            x, y = rng.standard_normal((2, 40))
            a = rng.uniform(0.1, 10.0)
            b = rng.uniform(-5.0, 5.0)
            r = pearson(x, y)
            assert pearson(a * x + b, y) == pytest.approx(r, abs=1e-12)
            assert pearson(-a * x + b, y) == pytest.approx(-r, abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length mismatch"):
            pearson([1.0, 2.0], [1.0, 2.0, 3.0])

    def test_constant_input(self):
        with pytest.raises(ValueError, match="constant"):
            pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
        with pytest.raises(ValueError, match="constant"):
            pearson([1.0, 2.0, 3.0], [5.0, 5.0, 5.0])

    def test_too_short(self):
        with pytest.raises(ValueError, match="at least 2"):
            pearson([1.0], [2.0])


class TestRms:
    def test_zeros(self):
        assert rms(np.zeros(10)) == 0.0

    def test_constant(self):
        assert rms(np.full(7, -3.5)) == pytest.approx(3.5, abs=1e-15)

    def test_unit_sine_whole_periods(self):
        # discrete mean of sin^2 over whole periods is exactly 1/2
        t = np.arange(1000) / 1000.0
        x = np.sin(2 * np.pi * 5.0 * t)
        assert rms(x) == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-12)

    def test_empty(self):
        with pytest.raises(ValueError, match="empty"):
            rms([])


class TestSnrDb:
    def test_unit_ratio(self):
        assert snr_db(3.7, 3.7) == 0.0

    def test_amplitude_ratio_at_15db(self):
        assert snr_db(10 ** 0.75, 1.0) == pytest.approx(15.0, abs=1e-9)
        assert snr_db(5.6234, 1.0) == pytest.approx(15.0, abs=1e-3)

    def test_amplitude_ratio_at_7_5db(self):
        assert snr_db(2.3714, 1.0) == pytest.approx(7.5, abs=1e-3)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            snr_db(0.0, 1.0)
        with pytest.raises(ValueError):
            snr_db(1.0, -2.0)


class TestAddNoiseAtSnr:
    def test_baseline_sentinel_is_identity(self):
        x = np.sin(np.arange(100) * 0.17)
        out = add_noise_at_snr(x, math.inf, np.random.default_rng(0))
        assert np.array_equal(out, x)
        assert out is not x

    def test_achieved_snr(self):
        t = np.arange(60000) / 1000.0
        x = 30.0 * np.sin(2 * np.pi * 10.0 * t)
        out = add_noise_at_snr(x, 10.0, np.random.default_rng(3))
        achieved = snr_db(rms(x), rms(out - x))
        assert abs(achieved - 10.0) < 0.2

    def test_achieved_snr_many_seeds(self):
        t = np.arange(60000) / 500.0
        x = 12.0 * np.sin(2 * np.pi * 4.0 * t) + 5.0 * np.cos(2 * np.pi * 11.0 * t)
        for seed in range(100):
            out = add_noise_at_snr(x, 10.0, np.random.default_rng(seed))
            assert abs(snr_db(rms(x), rms(out - x)) - 10.0) < 0.2

    def test_deterministic_per_seed(self):
        x = np.sin(np.arange(500) * 0.03) + 2.0
        a = add_noise_at_snr(x, 5.0, np.random.default_rng(42))
        b = add_noise_at_snr(x, 5.0, np.random.default_rng(42))
        assert np.array_equal(a, b)

    def test_zero_channel(self):
        with pytest.raises(ValueError, match="zero-RMS"):
            add_noise_at_snr(np.zeros(100), 10.0, np.random.default_rng(0))

    def test_non_finite_snr(self):
        with pytest.raises(ValueError):
            add_noise_at_snr(np.ones(10), math.nan, np.random.default_rng(0))


def _mono_recording(x, fs):
    return Recording(np.atleast_2d(x), fs, ["ch0"], ["measurement"])


class TestFilters:
    def test_zero_signal_stays_zero(self):
        rec = _mono_recording(np.zeros(2000), 1000.0)
        assert np.allclose(highpass(rec, 1.0).data, 0.0)
        assert np.allclose(lowpass(rec, 35.0).data, 0.0)

    def test_lowpass_stopband(self):
        # squared 4th-order Butterworth magnitude at 100/35 Hz: ~2e-4
        t = np.arange(4000) / 1000.0
        rec = _mono_recording(np.sin(2 * np.pi * 100.0 * t), 1000.0)
        out = lowpass(rec, 35.0)
        assert rms(out.data[0]) < 0.05 * rms(rec.data[0])

    def test_highpass_passband(self):
        t = np.arange(4000) / 1000.0
        rec = _mono_recording(np.sin(2 * np.pi * 10.0 * t), 1000.0)
        out = highpass(rec, 1.0)
        assert rms(out.data[0]) == pytest.approx(rms(rec.data[0]), rel=0.02)

    def test_dimensions_preserved(self):
        rng = np.random.default_rng(0)
        rec = Recording(rng.standard_normal((3, 500)), 250.0,
                        ["a", "b", "c"], ["measurement"] * 3)
        assert lowpass(rec, 30.0).data.shape == (3, 500)
        assert highpass(rec, 1.0).data.shape == (3, 500)

    def test_linearity(self):
        rng = np.random.default_rng(5)
        x = rng.standard_normal((2, 3000))
        y = rng.standard_normal((2, 3000))
        rec = lambda d: Recording(d, 500.0, ["a", "b"], ["measurement"] * 2)
        for filt, fc in ((highpass, 1.0), (lowpass, 35.0)):
            fx = filt(rec(x), fc).data
            fy = filt(rec(y), fc).data
            fxy = filt(rec(x + y), fc).data
            scale = np.max(np.abs(fxy))
            assert np.max(np.abs(fxy - (fx + fy))) < 1e-9 * scale

    def test_cutoff_validation(self):
        rec = _mono_recording(np.zeros(100), 100.0)
        for bad in (0.0, -1.0, 50.0, 60.0):
            with pytest.raises(ValueError, match="cutoff"):
                highpass(rec, bad)
            with pytest.raises(ValueError, match="cutoff"):
                lowpass(rec, bad)


class TestGaussianityStats:
    def test_seeded_normal_moments(self):
        x = np.random.default_rng(12).standard_normal(15000)
        rep = gaussianity_stats(x)
        assert abs(rep.skewness) < 0.07
        assert abs(rep.kurtosis - 3.0) < 0.14
        assert rep.max_cdf_distance < 0.015

    def test_uniform_kurtosis(self):
        # kurtosis of U(0,1) is 9/5
        x = np.random.default_rng(7).uniform(0.0, 1.0, 15000)
        rep = gaussianity_stats(x)
        assert rep.kurtosis == pytest.approx(1.8, abs=0.1)

    def test_population_convention(self):
        x = np.array([1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0])
        rep = gaussianity_stats(x)
        assert rep.mean == pytest.approx(4.5)
        assert rep.std == pytest.approx(math.sqrt(np.mean((x - 4.5) ** 2)), abs=1e-12)

    def test_zero_variance(self):
        with pytest.raises(ValueError, match="zero-variance"):
            gaussianity_stats(np.full(100, 2.0))

    def test_too_short(self):
        with pytest.raises(ValueError, match="at least 8"):
            gaussianity_stats(np.arange(7.0))

    def test_cdf_distance_bounded(self):
        x = np.random.default_rng(3).exponential(size=500)
        rep = gaussianity_stats(x)
        assert 0.0 <= rep.max_cdf_distance <= 1.0


class TestQuantizationNoise:
    def test_adc_resolution(self):
        assert quantization_noise_rms(0.1) == pytest.approx(0.02887, abs=1e-5)

    def test_zero(self):
        assert quantization_noise_rms(0.0) == 0.0

    def test_unit(self):
        assert quantization_noise_rms(1.0) == pytest.approx(0.288675, abs=1e-6)

    def test_linear_in_resolution(self):
        for r in (0.05, 0.2, 1.7):
            assert quantization_noise_rms(3 * r) == pytest.approx(
                3 * quantization_noise_rms(r), rel=1e-12)

    def test_negative(self):
        with pytest.raises(ValueError):
            quantization_noise_rms(-0.1)


def excursion_oracle(f, vpp, duration):
    """Brute-force max-over-phase peak-to-peak swing on a fine grid."""
    t = np.linspace(0.0, duration, 4001)
    best = 0.0
    for phi in np.linspace(0.0, 2 * np.pi, 720, endpoint=False):
        s = 0.5 * vpp * np.sin(2 * np.pi * f * t + phi)
        best = max(best, s.max() - s.min())
    return best


class TestSineMaxExcursion:
    def test_slow_generator_sine(self):
        # 1 uHz, 10 mVpp, 60 s window
        v = sine_max_excursion(1e-6, 10e-3, 60.0)
        assert v * 1e6 == pytest.approx(1.885, abs=5e-3)

    def test_zero_amplitude(self):
        assert sine_max_excursion(3.0, 0.0, 10.0) == 0.0

    def test_full_cycle_saturates(self):
        assert sine_max_excursion(1.0, 2.0, 10.0) == 2.0

    def test_matches_bruteforce(self):
        for f, vpp, d in ((0.001, 1.0, 100.0), (0.5, 2.0, 0.4), (2.0, 1.0, 3.0)):
            assert sine_max_excursion(f, vpp, d) == pytest.approx(
                excursion_oracle(f, vpp, d), rel=2e-3)

    def test_negative_inputs(self):
        with pytest.raises(ValueError):
            sine_max_excursion(-1.0, 1.0, 1.0)
