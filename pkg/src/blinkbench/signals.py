"""Signal statistics, zero-phase filtering, and SNR-calibrated noise.

Conventions used throughout: SNR is an RMS amplitude ratio expressed as
20*log10(signal/noise) dB; statistical moments use the population
(biased) convention and kurtosis is non-excess, so an ideal Gaussian has
kurtosis 3. Constant inputs are rejected with an error wherever a
correlation or a distribution shape is requested, never turned into NaN.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal as sps
from scipy.stats import norm

from .recording import Recording

FILTER_ORDER = 4


@dataclass
class GaussianityReport:
    """Moment and CDF-distance summary of a sample distribution.

    ``max_cdf_distance`` is the sup-norm distance between the empirical
    CDF and the Gaussian CDF with the same mean and variance.
    """

    mean: float
    std: float
    skewness: float
    kurtosis: float
    max_cdf_distance: float

    def as_dict(self) -> dict:
        return {
            "mean": self.mean,
            "std": self.std,
            "skewness": self.skewness,
            "kurtosis": self.kurtosis,
            "max_cdf_distance": self.max_cdf_distance,
        }


def pearson(x, y) -> float:
    """Product-moment correlation of two equal-length sequences.

    Raises
    ------
    ValueError
        If the lengths differ, either input has fewer than two samples,
        or either input is constant (zero variance).
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.size != y.size:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    if x.size < 2:
        raise ValueError("need at least 2 samples")
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = float(xc @ xc)
    syy = float(yc @ yc)
    if sxx == 0.0 or syy == 0.0:
        raise ValueError("constant input has no defined correlation")
    r = float(xc @ yc) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def rms(x) -> float:
    """Root mean square amplitude."""
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size == 0:
        raise ValueError("rms of empty input")
    return float(np.sqrt(np.mean(x * x)))


def snr_db(signal_rms: float, noise_rms: float) -> float:
    """RMS amplitude ratio in decibels, 20*log10(signal/noise)."""
    if signal_rms <= 0 or noise_rms <= 0:
        raise ValueError("snr_db requires strictly positive RMS amplitudes")
    return 20.0 * math.log10(signal_rms / noise_rms)


def add_noise_at_snr(channel, snr: float, rng: np.random.Generator):
    """Add zero-mean Gaussian noise calibrated to a target SNR.

    The noise standard deviation is ``rms(channel) / 10**(snr/20)``, so
    the requested SNR is hit in expectation over the noise draw. Passing
    ``snr = +inf`` disables noise and returns an unchanged copy.

    Parameters
    ----------
    channel : 1-D sample sequence (uV)
    snr : float
        Target SNR in dB; ``math.inf`` means no noise.
    rng : numpy Generator
        Seeded stream; a fixed seed reproduces the noise exactly.
    """
    channel = np.asarray(channel, dtype=np.float64).ravel()
    if math.isinf(snr) and snr > 0:
        return channel.copy()
    if not math.isfinite(snr):
        raise ValueError(f"snr must be finite or +inf, got {snr}")
    level = rms(channel)
    if level == 0.0:
        raise ValueError("cannot calibrate noise against a zero-RMS channel")
    sigma = level / 10.0 ** (snr / 20.0)
    return channel + rng.normal(0.0, sigma, size=channel.size)


def zero_phase_filter(x, fs: float, fc: float, btype: str):
    """Forward-backward 4th-order Butterworth filter along the last axis.

    Odd-reflection padding of three filter orders at each edge keeps the
    blink kernel and other short transients undistorted near boundaries.
    """
    if not 0.0 < fc < fs / 2.0:
        raise ValueError(
            f"cutoff must lie in (0, fs/2) = (0, {fs / 2.0}), got {fc}"
        )
    sos = sps.butter(FILTER_ORDER, fc, btype=btype, fs=fs, output="sos")
    return sps.sosfiltfilt(sos, np.asarray(x, dtype=np.float64),
                           axis=-1, padtype="odd", padlen=3 * FILTER_ORDER)


def highpass(rec: Recording, fc: float) -> Recording:
    """Zero-phase high-pass of every channel; dimensions are preserved."""
    return rec.with_data(zero_phase_filter(rec.data, rec.fs, fc, "highpass"))


def lowpass(rec: Recording, fc: float) -> Recording:
    """Zero-phase low-pass of every channel; dimensions are preserved."""
    return rec.with_data(zero_phase_filter(rec.data, rec.fs, fc, "lowpass"))


def gaussianity_stats(samples) -> GaussianityReport:
    """Moments plus sup-norm CDF distance against a matched Gaussian.

    Moments use the population convention; kurtosis is non-excess
    (Gaussian -> 3). The CDF distance is the Kolmogorov-Smirnov statistic
    against the normal distribution with the sample's own mean and
    variance.
    """
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size < 8:
        raise ValueError(f"need at least 8 samples, got {x.size}")
    mean = float(x.mean())
    centered = x - mean
    var = float(np.mean(centered ** 2))
    if var == 0.0:
        raise ValueError("zero-variance input has no distribution shape")
    std = math.sqrt(var)
    skew = float(np.mean(centered ** 3)) / std ** 3
    kurt = float(np.mean(centered ** 4)) / var ** 2

    xs = np.sort(x)
    n = xs.size
    cdf = norm.cdf(xs, loc=mean, scale=std)
    d_plus = float(np.max(np.arange(1, n + 1) / n - cdf))
    d_minus = float(np.max(cdf - np.arange(0, n) / n))
    return GaussianityReport(mean, std, skew, kurt, max(d_plus, d_minus))


def quantization_noise_rms(resolution: float) -> float:
    """RMS of uniform quantization error for a given amplitude step."""
    if resolution < 0:
        raise ValueError("resolution must be non-negative")
    return resolution / math.sqrt(12.0)


def sine_max_excursion(f: float, vpp: float, duration: float) -> float:
    """Worst-case peak-to-peak swing of a sine inside a finite window.

    Maximized over the sine's phase. For windows shorter than half a
    period the worst placement straddles a zero crossing, giving
    ``vpp * sin(pi * f * duration)``; longer windows see the full swing.
    """
    if f < 0 or vpp < 0 or duration < 0:
        raise ValueError("f, vpp and duration must be non-negative")
    return vpp * math.sin(min(math.pi * f * duration, math.pi / 2.0))
