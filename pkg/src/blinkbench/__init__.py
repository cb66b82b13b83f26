"""Blind source separation and a synthetic-EEG noise benchmark.

The package answers one question at desk scale: how does calibrated
Gaussian measurement noise affect the ability of ICA (FastICA and
Infomax) to pick out an eyeblink artifact from multichannel recordings,
in correlation score and in fit time.

Modules
-------
recording
    The channels-by-samples container and its CSV serialization.
signals
    Pearson correlation, RMS/SNR arithmetic, calibrated noise, zero-phase
    Butterworth filtering, Gaussianity statistics.
ica
    Centering, whitening, FastICA (deflation/parallel) and Infomax,
    source extraction and component-nullifying reconstruction.
synth
    Synthetic recordings, the blink kernel, blink schedules, injection,
    and the LO1 reference channel.
bench
    Electrode subsets, segment draws, the Monte Carlo SNR sweep,
    correlation scoring, degradation and aggregation.
cli
    The ``blinkbench`` command: synth, sweep, report, characterize.
"""

from .bench import (
    BASELINE_SNR,
    DegradationRecord,
    ElectrodeConfig,
    GroupSummary,
    SweepResult,
    TrialResult,
    aggregate,
    correlation_score,
    degradation,
    degradation_record,
    export_component_weights,
    read_results_csv,
    run_sweep,
    run_trial,
    select_segment,
    standard_config,
    subset_channels,
    summary_tree,
    write_results_csv,
    write_summary_json,
)
from .ica import (
    IcaModel,
    IcaOptions,
    MixingModel,
    center,
    fastica,
    fit,
    infomax,
    nullify_and_reconstruct,
    permutation_scaling_distance,
    sources,
    whiten,
)
from .recording import (
    EOG,
    MEASUREMENT,
    REFERENCE,
    Recording,
    RecordingFormatError,
    read_recording_csv,
    write_recording_csv,
)
from .signals import (
    GaussianityReport,
    add_noise_at_snr,
    gaussianity_stats,
    highpass,
    lowpass,
    pearson,
    quantization_noise_rms,
    rms,
    sine_max_excursion,
    snr_db,
    zero_phase_filter,
)
from .synth import (
    BlinkDataset,
    BlinkSchedule,
    DESK_MONTAGE_8,
    FULL_MONTAGE_28,
    SynthSpec,
    draw_blink_schedule,
    frontal_topography,
    generate_clean_recording,
    inject_blinks,
    isolate_eyeblink_component,
    make_blink_dataset,
    set_reference_channel,
    synth_blink_kernel,
)

__version__ = "0.1.0"
