"""
Measurement-noise characterization
==================================

Generates SNR-calibrated Gaussian noise the same way the benchmark
injects it, then checks that it earns the name: moments close to the
ideal Gaussian (skewness 0, kurtosis 3) and an empirical CDF that hugs
the matched Gaussian CDF. Also demonstrates the two small hardware-side
utilities: quantization-noise RMS for a given amplitude resolution, and
the worst-case excursion of a very slow calibration sine inside a
finite recording window.
"""

import numpy as np

from blinkbench import (
    add_noise_at_snr,
    gaussianity_stats,
    quantization_noise_rms,
    rms,
    sine_max_excursion,
    snr_db,
)

# --- calibrated noise and its distribution ---------------------------------
# A constant 1 uV carrier makes the injected noise easy to read back out.
carrier = np.ones(15000)
noisy = add_noise_at_snr(carrier, 0.0, np.random.default_rng(0))
noise = noisy - carrier

report = gaussianity_stats(noise)
print("noise draw at 0 dB against a 1 uV carrier (15000 samples)")
print(f"  mean             {report.mean:+.5f} uV")
print(f"  std              {report.std:.5f} uV")
print(f"  skewness         {report.skewness:+.5f}   (ideal Gaussian: 0)")
print(f"  kurtosis         {report.kurtosis:.5f}   (ideal Gaussian: 3)")
print(f"  max CDF distance {report.max_cdf_distance:.5f}")

# --- the calibration hits its target SNR ------------------------------------
t = np.arange(60000) / 1000.0
eeg_like = 30.0 * np.sin(2 * np.pi * 10.0 * t)
print("\nachieved SNR on a 60000-sample channel:")
for target in (0.0, 7.5, 15.0, 20.0):
    out = add_noise_at_snr(eeg_like, target, np.random.default_rng(1))
    achieved = snr_db(rms(eeg_like), rms(out - eeg_like))
    ratio = rms(eeg_like) / rms(out - eeg_like)
    print(f"  target {target:5.1f} dB -> achieved {achieved:6.3f} dB "
          f"(amplitude ratio {ratio:.2f}x)")

# --- hardware-side utilities -------------------------------------------------
step = 0.1  # uV, a typical acquisition amplitude resolution
print(f"\nquantization noise for a {step} uV resolution: "
      f"{quantization_noise_rms(step):.4f} uV RMS")

swing = sine_max_excursion(1e-6, 10e-3, 60.0)
print("worst-case swing of a 1 uHz, 10 mVpp calibration sine over 60 s: "
      f"{swing * 1e6:.2f} uV (effectively a constant source)")
