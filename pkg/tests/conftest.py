import numpy as np
import pytest

import blinkbench as bb

# 12-channel montage used by the benchmark-trend fixtures; wide enough that
# the adaptive z-score has headroom and the deflation slowdown under noise
# is pronounced.
MONTAGE_12 = ("FP1", "FP2", "F3", "Fz", "F4", "C3", "Cz", "C4",
              "P3", "Pz", "P4", "Oz")


def blink_spec(labels=bb.DESK_MONTAGE_8, fs=250.0, duration=90.0,
               channel_rms=10.0, blink_amplitude=300.0, seed=0):
    """Frontal-blink synthesis recipe with a strong, separable artifact."""
    return bb.SynthSpec(labels=labels, fs=fs, duration=duration,
                        channel_rms=channel_rms,
                        blink_amplitude=blink_amplitude, seed=seed)


@pytest.fixture(scope="session")
def small_blink_dataset():
    """8-channel, 90 s frontal-blink dataset shared by unit tests."""
    return bb.make_blink_dataset(blink_spec(seed=11))


@pytest.fixture(scope="session")
def bench_dataset():
    """12-channel, 300 s frontal-blink dataset for trend and timing tests."""
    return bb.make_blink_dataset(blink_spec(labels=MONTAGE_12, duration=300.0,
                                            seed=2026))


def laplace_mixture(n_sources, n_samples, seed, max_condition=10.0):
    """Ground-truth mixing of i.i.d. Laplace sources, well conditioned."""
    rng = np.random.default_rng(seed)
    S = rng.laplace(size=(n_sources, n_samples))
    A = rng.standard_normal((n_sources, n_sources))
    while np.linalg.cond(A) >= max_condition:
        A = rng.standard_normal((n_sources, n_sources))
    return A @ S, A, S
