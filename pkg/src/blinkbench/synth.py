"""Synthetic multichannel EEG with injected eyeblink artifacts.

Builds clean recordings as random full-rank mixtures of band-limited,
bursty (super-Gaussian) sources, shapes a one-second blink kernel,
schedules blinks with uniformly distributed gaps, and wires up the LO1
reference channel that downstream scoring correlates against. Ground
truth (mixing matrix, schedule, kernel, topography) is returned with
every dataset so separation quality can be checked against construction
rather than against another algorithm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ica import IcaModel, MixingModel, sources
from .recording import EOG, MEASUREMENT, Recording
from .signals import pearson, rms, zero_phase_filter

DESK_MONTAGE_8 = ("FP1", "FP2", "F3", "F4", "C3", "C4", "P3", "P4")
FULL_MONTAGE_28 = (
    "FP1", "FP2", "F7", "F3", "Fz", "F4", "F8",
    "FC5", "FC1", "FC2", "FC6",
    "T7", "C3", "Cz", "C4", "T8",
    "CP5", "CP1", "CP2", "CP6",
    "P7", "P3", "Pz", "P4", "P8",
    "O1", "Oz", "O2",
)

MIN_BLINK_GAP = 5.0
MAX_BLINK_GAP = 10.0
KERNEL_SECONDS = 1.0
ZSCORE_THRESHOLD = 2.6


@dataclass
class SynthSpec:
    """Recipe for one synthetic recording.

    ``labels``/``roles`` define the montage; roles default to all
    measurement. Sources are 1/f-shaped noise inside ``source_band``
    multiplied by a slow log-normal envelope whose ``envelope_strength``
    controls how bursty (super-Gaussian) they are.
    """

    labels: tuple
    fs: float
    duration: float
    roles: tuple = ()
    source_band: tuple = (1.0, 45.0)
    spectral_exponent: float = 1.0
    envelope_strength: float = 0.4
    channel_rms: float = 20.0
    blink_amplitude: float = 100.0
    seed: int = 0

    def __post_init__(self):
        self.labels = tuple(self.labels)
        if not self.roles:
            self.roles = tuple(MEASUREMENT for _ in self.labels)
        self.roles = tuple(self.roles)
        if len(self.roles) != len(self.labels):
            raise ValueError("roles must match labels one-to-one")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("montage labels must be unique")
        if self.fs <= 70.0:
            raise ValueError(
                f"fs must exceed 70 Hz (twice the 35 Hz kernel band), got {self.fs}"
            )
        if self.duration < 61.0:
            raise ValueError(
                "duration must be at least 61 s (a one-minute analysis "
                f"segment plus margin), got {self.duration}"
            )
        lo, hi = self.source_band
        if not 0.0 < lo < hi < self.fs / 2.0:
            raise ValueError(f"source_band must satisfy 0 < lo < hi < fs/2, got {self.source_band}")
        if self.n_channels < 2:
            raise ValueError("need at least 2 measurement channels")

    @property
    def n_channels(self) -> int:
        return sum(1 for r in self.roles if r == MEASUREMENT)

    @property
    def n_samples(self) -> int:
        return int(round(self.duration * self.fs))


@dataclass
class BlinkSchedule:
    """Blink onsets (s), the shared one-second kernel, and per-channel weights."""

    timestamps: np.ndarray
    kernel: np.ndarray
    topography: np.ndarray

    def __post_init__(self):
        self.timestamps = np.asarray(self.timestamps, dtype=np.float64).ravel()
        self.kernel = np.asarray(self.kernel, dtype=np.float64).ravel()
        self.topography = np.asarray(self.topography, dtype=np.float64).ravel()
        if self.timestamps.size:
            if self.timestamps[0] < MIN_BLINK_GAP:
                raise ValueError(
                    f"first blink onset must be at least {MIN_BLINK_GAP} s in"
                )
            gaps = np.diff(self.timestamps)
            if not np.all((gaps > MIN_BLINK_GAP) & (gaps < MAX_BLINK_GAP)):
                raise ValueError(
                    f"gaps between consecutive blinks must lie strictly "
                    f"inside ({MIN_BLINK_GAP}, {MAX_BLINK_GAP}) s"
                )


def _band_shaped_noise(n_samples, fs, band, exponent, rng):
    """Gaussian noise with a 1/f^exponent power shape inside ``band``."""
    spectrum = np.fft.rfft(rng.standard_normal(n_samples))
    freqs = np.fft.rfftfreq(n_samples, 1.0 / fs)
    gain = np.zeros_like(freqs)
    lo, hi = band
    inside = (freqs >= lo) & (freqs <= hi)
    gain[inside] = freqs[inside] ** (-exponent / 2.0)
    return np.fft.irfft(spectrum * gain, n=n_samples)


def _slow_envelope(n_samples, fs, strength, rng):
    """Positive log-normal envelope varying below 0.5 Hz, unit mean scale."""
    spectrum = np.fft.rfft(rng.standard_normal(n_samples))
    freqs = np.fft.rfftfreq(n_samples, 1.0 / fs)
    gain = ((freqs > 0.0) & (freqs <= 0.5)).astype(float)
    slow = np.fft.irfft(spectrum * gain, n=n_samples)
    sd = slow.std()
    if sd > 0:
        slow /= sd
    return np.exp(strength * slow)


def _random_mixing(n, rng):
    """Well-conditioned square mixing: orthogonal x diag x orthogonal."""
    def ortho():
        q, r = np.linalg.qr(rng.standard_normal((n, n)))
        d = np.diag(r)
        return q * np.where(d == 0, 1.0, np.sign(d))

    return ortho() @ np.diag(rng.uniform(0.7, 1.3, size=n)) @ ortho()


def generate_clean_recording(spec: SynthSpec):
    """Blink-free synthetic recording plus its ground-truth mixture.

    Measurement channels are a random full-rank mixing of independent
    band-limited super-Gaussian sources, high-passed at 1 Hz and scaled
    so each channel sits at ``spec.channel_rms`` uV. Non-measurement
    montage channels get small independent noise and stay outside the
    mixture. Deterministic for a fixed ``spec.seed``.
    """
    rng = np.random.default_rng(spec.seed)
    n = spec.n_channels
    m = spec.n_samples

    S = np.empty((n, m))
    for i in range(n):
        carrier = _band_shaped_noise(m, spec.fs, spec.source_band,
                                     spec.spectral_exponent, rng)
        source = carrier * _slow_envelope(m, spec.fs, spec.envelope_strength, rng)
        source = zero_phase_filter(source, spec.fs, 1.0, "highpass")
        S[i] = source / rms(source)

    A0 = _random_mixing(n, rng)
    x0 = A0 @ S
    channel_scale = spec.channel_rms / np.sqrt(np.mean(x0 * x0, axis=1))
    A = channel_scale[:, None] * A0
    x = A @ S

    data = np.empty((len(spec.labels), m))
    meas_row = 0
    for row, role in enumerate(spec.roles):
        if role == MEASUREMENT:
            data[row] = x[meas_row]
            meas_row += 1
        else:
            data[row] = rng.normal(0.0, 2.0, size=m)
    rec = Recording(data, spec.fs, list(spec.labels), list(spec.roles))
    return rec, MixingModel(A=A, s=S, x=x)


def synth_blink_kernel(fs: float, amplitude: float):
    """One-second single-peaked blink pulse, band-limited below 35 Hz.

    Difference of exponentials (50 ms rise, 150 ms decay) starting at
    0.218 s so the peak lands near 0.3 s, then zero-phase low-passed at
    35 Hz and rescaled so the maximum equals ``amplitude``. Endpoints
    stay within 1% of zero.
    """
    if fs <= 70.0:
        raise ValueError(f"fs must exceed 70 Hz, got {fs}")
    n = int(round(fs * KERNEL_SECONDS))
    t = np.arange(n) / fs
    onset, rise, decay = 0.218, 0.05, 0.15
    u = np.clip(t - onset, 0.0, None)
    pulse = np.exp(-u / decay) - np.exp(-u / rise)
    pulse = zero_phase_filter(pulse, fs, 35.0, "lowpass")
    # half-cosine fade over the final 10% pins the trailing endpoint to zero
    fade = max(2, n // 10)
    pulse[n - fade:] *= 0.5 * (1.0 + np.cos(np.linspace(0.0, np.pi, fade)))
    return pulse * (amplitude / pulse.max())


def draw_blink_schedule(duration: float, fs: float, rng: np.random.Generator):
    """Blink onset times with uniform (5, 10) s gaps, on the sample grid.

    Gap draws are quantized to the sample period and nudged one sample
    inside the open interval if rounding lands on a boundary. Sampling
    stops at the first blink whose one-second window would overrun the
    recording.
    """
    if duration <= MAX_BLINK_GAP + KERNEL_SECONDS:
        raise ValueError(
            f"duration must exceed {MAX_BLINK_GAP + KERNEL_SECONDS} s "
            f"to guarantee at least one blink, got {duration}"
        )
    step = 1.0 / fs
    onsets = []
    t = 0.0
    while True:
        gap = round(rng.uniform(MIN_BLINK_GAP, MAX_BLINK_GAP) * fs) / fs
        gap = min(max(gap, MIN_BLINK_GAP + step), MAX_BLINK_GAP - step)
        onset = t + gap
        if onset + KERNEL_SECONDS > duration:
            break
        onsets.append(onset)
        t = onset
    return np.asarray(onsets)


def frontal_topography(labels, frontal=None, frontal_weights=(0.9, 0.85)):
    """Per-channel blink weights concentrated on the front-most channels.

    ``frontal`` defaults to the first two labels starting with "FP" (or
    the first two labels outright). Other frontal-row channels get 0.05
    and everything else 0.02, mirroring how strongly a blink couples
    into electrodes by distance from the eyes.
    """
    labels = list(labels)
    if frontal is None:
        frontal = [l for l in labels if l.upper().startswith("FP")][:2]
        if len(frontal) < 2:
            frontal = labels[:2]
    frontal = list(frontal)
    weights = np.empty(len(labels))
    for i, label in enumerate(labels):
        if label in frontal:
            weights[i] = frontal_weights[frontal.index(label) % len(frontal_weights)]
        elif label.upper().startswith("F"):
            weights[i] = 0.05
        else:
            weights[i] = 0.02
    return weights


def inject_blinks(clean: Recording, schedule: BlinkSchedule):
    """Add the blink kernel at every onset, weighted per channel.

    Returns the contaminated recording and the unit-topography reference
    trace (the kernel summed over onsets, zero elsewhere).
    """
    kernel = schedule.kernel
    expected = int(round(clean.fs * KERNEL_SECONDS))
    if kernel.size != expected:
        raise ValueError(
            f"kernel holds {kernel.size} samples but one second at "
            f"fs={clean.fs} is {expected}"
        )
    if schedule.topography.size != clean.n_channels:
        raise ValueError(
            f"topography has {schedule.topography.size} weights for "
            f"{clean.n_channels} channels"
        )
    reference = np.zeros(clean.n_samples)
    for onset in schedule.timestamps:
        start = int(round(onset * clean.fs))
        if start + kernel.size > clean.n_samples:
            raise ValueError(f"blink at {onset} s overruns the recording")
        reference[start:start + kernel.size] += kernel
    contaminated = clean.data + schedule.topography[:, None] * reference[None, :]
    return clean.with_data(contaminated), reference


def set_reference_channel(rec: Recording, trace, label: str = "LO1") -> Recording:
    """Write ``trace`` into the named channel and force its role to EOG.

    The channel is appended when absent. Downstream fitting and noise
    injection skip EOG channels, so this channel stays pristine for
    scoring.
    """
    trace = np.asarray(trace, dtype=np.float64).ravel()
    if trace.size != rec.n_samples:
        raise ValueError(
            f"trace has {trace.size} samples, recording has {rec.n_samples}"
        )
    labels = list(rec.labels)
    roles = list(rec.roles)
    if label in labels:
        idx = labels.index(label)
        data = rec.data.copy()
        data[idx] = trace
        roles[idx] = EOG
    else:
        data = np.vstack([rec.data, trace[None, :]])
        labels.append(label)
        roles.append(EOG)
    return Recording(data, rec.fs, labels, roles)


def _adaptive_zscore_flags(scores, threshold):
    """Iteratively flag scores whose z-value (population moments) exceeds
    the threshold, re-scoring the survivors until nothing new is flagged."""
    flags = np.zeros(scores.size, dtype=bool)
    while True:
        remaining = scores[~flags]
        if remaining.size < 2:
            break
        sd = remaining.std()
        if sd == 0.0:
            break
        z = (scores - remaining.mean()) / sd
        new = (~flags) & (z > threshold)
        if not new.any():
            break
        flags |= new
    return flags


def isolate_eyeblink_component(rec: Recording, model: IcaModel,
                               threshold: float = ZSCORE_THRESHOLD):
    """Indices of components that track an EOG channel unusually well.

    Correlation magnitudes between each component and each high-passed
    EOG channel are z-scored adaptively: values above the threshold are
    flagged and removed, the rest re-scored, until the flag set stops
    growing. Returns the sorted union over EOG channels; an empty list
    means nothing stood out.
    """
    eog_rows = rec.role_indices(EOG)
    if not eog_rows:
        raise ValueError("recording has no EOG channel to correlate against")
    comps = sources(model, rec)
    flagged = set()
    for row in eog_rows:
        eog = zero_phase_filter(rec.data[row], rec.fs, 1.0, "highpass")
        scores = np.array([abs(pearson(comp, eog)) for comp in comps])
        flagged.update(np.nonzero(_adaptive_zscore_flags(scores, threshold))[0].tolist())
    return sorted(flagged)


@dataclass
class BlinkDataset:
    """A contaminated recording bundled with everything that made it."""

    recording: Recording
    schedule: BlinkSchedule
    mixing: MixingModel
    reference: np.ndarray
    reference_label: str = "LO1"


def make_blink_dataset(spec: SynthSpec, topography=None,
                       reference_label: str = "LO1") -> BlinkDataset:
    """Full pipeline: clean mixture, blink schedule, injection, LO1.

    ``topography`` defaults to :func:`frontal_topography` over the
    spec's labels. Deterministic for a fixed ``spec.seed``.
    """
    clean, mixing = generate_clean_recording(spec)
    if topography is None:
        topography = frontal_topography(clean.labels)
    kernel = synth_blink_kernel(spec.fs, spec.blink_amplitude)
    schedule_rng = np.random.default_rng(np.random.SeedSequence([int(spec.seed), 1]))
    schedule = BlinkSchedule(
        timestamps=draw_blink_schedule(spec.duration, spec.fs, schedule_rng),
        kernel=kernel,
        topography=np.asarray(topography, dtype=np.float64),
    )
    contaminated, reference = inject_blinks(clean, schedule)
    with_ref = set_reference_channel(contaminated, reference, reference_label)
    return BlinkDataset(with_ref, schedule, mixing, reference, reference_label)
