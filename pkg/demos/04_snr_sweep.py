"""
Monte Carlo SNR sweep
=====================

A desk-scale version of the full experiment: one synthetic dataset, two
electrode configurations (with and without the frontal channels), one
algorithm, a coarse SNR grid plus the no-noise baseline, a handful of
Monte Carlo iterations per cell. Prints the correlation score, the
degradation q = (rho_0 - rho_gamma) / rho_0, and the mean fit time per
cell. The full-scale experiment is the same call with bigger axes; see
the blinkbench CLI.
"""

import math

from blinkbench import (
    BASELINE_SNR,
    DESK_MONTAGE_8,
    ElectrodeConfig,
    SynthSpec,
    aggregate,
    make_blink_dataset,
    run_sweep,
    standard_config,
)

spec = SynthSpec(labels=DESK_MONTAGE_8, fs=250.0, duration=120.0,
                 channel_rms=10.0, blink_amplitude=300.0, seed=42)
dataset = make_blink_dataset(spec)

configs = [
    standard_config("all", DESK_MONTAGE_8),
    ElectrodeConfig("back4", ("C3", "C4", "P3", "P4")),  # no frontal coverage
]
levels = [BASELINE_SNR, 0.0, 5.0, 10.0, 20.0]

result = run_sweep(
    datasets=[("demo", dataset.recording)],
    configs=configs,
    algorithms=["fastica_deflation"],
    snr_levels=levels,
    n_iterations=8,
    master_seed=42,
    segment_samples=10000,
)
print(f"ran {len(result.rows)} trials, {len(result.errors)} failures")

print(f"\n{'config':>8s} {'snr_db':>8s} {'mean_rho':>9s} {'q':>8s} "
      f"{'fit_ms':>8s} {'conv':>5s}")
for s in aggregate(result.rows):
    snr = "baseline" if math.isinf(s.snr_db) else f"{s.snr_db:.1f}"
    q = "-" if s.q is None else f"{s.q:8.3f}"
    print(f"{s.config:>8s} {snr:>8s} {s.mean_rho:9.3f} {q:>8s} "
          f"{s.mean_time_s * 1e3:8.1f} {s.convergence_rate:5.2f}")

print("\nreading: the all-channel configuration tracks the blink well and "
      "degrades\ngracefully as noise grows; without the frontal channels the "
      "blink is barely\nvisible to begin with.")
