"""Monte Carlo benchmark harness: segment draws, SNR sweep, scoring.

One trial subsets a recording to an electrode configuration, draws a
random contiguous segment, injects SNR-calibrated noise into every
measurement channel (never the LO1 reference), times an ICA fit, and
scores the fitted components against the reference blink trace. Sweeps
run the full Cartesian product of datasets, configurations, algorithms,
SNR levels and iterations with per-trial seeds derived functionally
from those coordinates, so results are reproducible at any parallelism
level and rows always come back in coordinate order.

The baseline (no-noise) level is represented by ``snr_db = math.inf``.
Segment seeds depend only on (dataset, iteration), so every SNR level,
configuration and algorithm sees the same segment in iteration ``i``
and degradation reflects noise rather than segment luck.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .ica import IcaModel, IcaOptions, fit, sources
from .recording import MEASUREMENT, Recording
from .signals import add_noise_at_snr, pearson

BASELINE_SNR = math.inf

RESULTS_CSV_COLUMNS = (
    "dataset", "config", "algorithm", "snr_db", "iteration", "rho",
    "best_component", "fit_time_s", "iterations_used", "converged",
    "segment_start", "seed",
)

# Approximations of the common reduced electrode layouts, expressed in
# 10-20 labels present in the 28-channel montage. Editable: pass a custom
# ElectrodeConfig to use exact lists.
STANDARD_SUBSETS = {
    "com9": ("F3", "Fz", "F4", "C3", "Cz", "C4", "P3", "Pz", "P4"),
    "em8": ("FP1", "FP2", "F3", "F4", "T7", "T8", "P3", "P4"),
    "att8": ("Fz", "F3", "F4", "Cz", "C3", "C4", "Pz", "Oz"),
    "mi10": ("FC5", "FC1", "FC2", "FC6", "C3", "Cz", "C4", "CP1", "CP2", "Pz"),
}


@dataclass(frozen=True)
class ElectrodeConfig:
    """Named measurement-channel subset."""

    name: str
    channels: tuple

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))
        if not self.channels:
            raise ValueError(f"config {self.name!r} has no channels")
        if len(set(self.channels)) != len(self.channels):
            raise ValueError(f"config {self.name!r} lists duplicate channels")


def standard_config(name: str, measurement_labels) -> ElectrodeConfig:
    """Builtin configuration by name; ``all`` spans the given montage."""
    if name == "all":
        return ElectrodeConfig("all", tuple(measurement_labels))
    if name in STANDARD_SUBSETS:
        return ElectrodeConfig(name, STANDARD_SUBSETS[name])
    raise ValueError(
        f"unknown electrode configuration {name!r}; "
        f"expected 'all' or one of {sorted(STANDARD_SUBSETS)}"
    )


@dataclass
class TrialResult:
    """Outcome of one Monte Carlo re-execution."""

    dataset: str
    config: str
    algorithm: str
    snr_db: float
    iteration: int
    rho: float
    best_component: int
    fit_time_s: float
    iterations_used: int
    converged: bool
    segment_start: int
    seed: int


@dataclass
class TrialError:
    """A failed trial, kept alongside results instead of aborting the sweep."""

    dataset: str
    config: str
    algorithm: str
    snr_db: float
    iteration: int
    message: str


@dataclass
class SweepResult:
    rows: list
    errors: list

    @property
    def ok(self) -> bool:
        return not self.errors


@dataclass
class DegradationRecord:
    """Relative correlation-score drop against the no-noise baseline."""

    rho_0: float
    rho_gamma: float
    q_gamma: float


@dataclass
class GroupSummary:
    """Aggregate over the iterations of one (dataset, config, algorithm, snr) cell."""

    dataset: str
    config: str
    algorithm: str
    snr_db: float
    n_trials: int
    mean_rho: float
    std_rho: float
    mean_time_s: float
    std_time_s: float
    convergence_rate: float
    rho_baseline: float | None
    q: float | None


def _text_key(text: str) -> int:
    return int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "big")


def _snr_key(snr_db: float) -> int:
    return int(np.float64(snr_db).view(np.uint64))


@dataclass
class TrialSeeds:
    """Seed material derived from trial coordinates.

    The segment stream ignores config, algorithm and SNR so paired
    trials share segments; the noise stream spawns one child per
    measurement channel so noise can be replayed channel-by-channel.
    """

    segment_seq: np.random.SeedSequence
    noise_seq: np.random.SeedSequence
    ica_seed: int
    trial_id: int

    def segment_rng(self) -> np.random.Generator:
        return np.random.default_rng(self.segment_seq)

    def noise_rngs(self, n_channels: int):
        return [np.random.default_rng(s) for s in self.noise_seq.spawn(n_channels)]


def derive_trial_seeds(master_seed: int, dataset: str, config: str,
                       algorithm: str, snr_db: float, iteration: int) -> TrialSeeds:
    base = [int(master_seed), _text_key(dataset)]
    coords = base + [_text_key(config), _text_key(algorithm)]
    segment_seq = np.random.SeedSequence(base + [int(iteration), _text_key("segment")])
    noise_seq = np.random.SeedSequence(
        coords + [_snr_key(snr_db), int(iteration), _text_key("noise")])
    ica_seq = np.random.SeedSequence(coords + [int(iteration), _text_key("ica")])
    trial_seq = np.random.SeedSequence(
        coords + [_snr_key(snr_db), int(iteration), _text_key("trial")])
    return TrialSeeds(
        segment_seq=segment_seq,
        noise_seq=noise_seq,
        ica_seed=int(ica_seq.generate_state(1, np.uint64)[0]),
        trial_id=int(trial_seq.generate_state(1, np.uint64)[0]),
    )


def select_segment(rec: Recording, length: int, rng: np.random.Generator):
    """Uniformly random contiguous slice across all channels.

    Returns ``(segment, start_index)``; the segment shares memory with
    the input.
    """
    if length < 1:
        raise ValueError("segment length must be at least 1 sample")
    if length > rec.n_samples:
        raise ValueError(
            f"recording has {rec.n_samples} samples, cannot take {length}"
        )
    start = int(rng.integers(0, rec.n_samples - length + 1))
    segment = Recording(rec.data[:, start:start + length], rec.fs,
                        list(rec.labels), list(rec.roles))
    return segment, start


def subset_channels(rec: Recording, config: ElectrodeConfig) -> Recording:
    """Restrict measurement channels to the configuration.

    EOG and reference channels are always retained so scoring still has
    its reference trace. Unknown labels raise, listing every missing one.
    """
    missing = [c for c in config.channels if c not in rec.labels]
    if missing:
        raise ValueError(
            f"config {config.name!r} names unknown channel(s): {missing}"
        )
    wanted = set(config.channels)
    keep = [
        i for i, (label, role) in enumerate(zip(rec.labels, rec.roles))
        if role != MEASUREMENT or label in wanted
    ]
    return rec.select(keep)


def correlation_score(model: IcaModel, rec: Recording, reference):
    """Max absolute Pearson correlation of any component with the reference.

    Returns ``(rho, component_index)``; ties go to the lowest index.
    """
    reference = np.asarray(reference, dtype=np.float64).ravel()
    comps = sources(model, rec)
    best_rho, best_idx = -1.0, -1
    for i in range(comps.shape[0]):
        r = abs(pearson(comps[i], reference))
        if r > best_rho:
            best_rho, best_idx = r, i
    return best_rho, best_idx


def run_trial(rec: Recording, dataset: str, config: ElectrodeConfig,
              algorithm: str, snr_db: float, iteration: int, master_seed: int,
              segment_samples: int, opts: IcaOptions | None = None,
              reference_label: str = "LO1") -> TrialResult:
    """One Monte Carlo re-execution.

    Only the ICA fit is timed (monotonic clock); segment selection,
    noise generation and scoring stay outside the measurement. The
    reference channel never receives noise. A fit that fails to converge
    is a result, not an error.
    """
    seeds = derive_trial_seeds(master_seed, dataset, config.name, algorithm,
                               snr_db, iteration)
    sub = subset_channels(rec, config)
    segment, start = select_segment(sub, segment_samples, seeds.segment_rng())

    data = segment.data.copy()
    meas = segment.measurement_indices
    if not (math.isinf(snr_db) and snr_db > 0):
        for idx, rng in zip(meas, seeds.noise_rngs(len(meas))):
            data[idx] = add_noise_at_snr(data[idx], snr_db, rng)
    noisy = segment.with_data(data)

    trial_opts = replace(opts, seed=seeds.ica_seed) if opts else IcaOptions(seed=seeds.ica_seed)
    t0 = time.perf_counter()
    model = fit(noisy, algorithm, trial_opts)
    fit_time = time.perf_counter() - t0

    reference = noisy.data[noisy.index_of(reference_label)]
    rho, best = correlation_score(model, noisy, reference)
    return TrialResult(
        dataset=dataset, config=config.name, algorithm=algorithm,
        snr_db=snr_db, iteration=iteration, rho=rho, best_component=best,
        fit_time_s=fit_time, iterations_used=model.iterations_used,
        converged=model.converged, segment_start=start, seed=seeds.trial_id,
    )


def run_sweep(datasets, configs, algorithms, snr_levels, n_iterations: int,
              master_seed: int, segment_samples: int,
              opts: IcaOptions | None = None, workers: int = 1,
              reference_label: str = "LO1") -> SweepResult:
    """Cartesian product of all axes, gathered in coordinate order.

    ``datasets`` is a sequence of ``(name, Recording)`` pairs. A failed
    trial is recorded with its coordinates and does not abort the sweep.
    Row order and every seeded value are independent of ``workers``.
    """
    datasets = list(datasets)
    configs = list(configs)
    algorithms = list(algorithms)
    snr_levels = list(snr_levels)
    if not (datasets and configs and algorithms and snr_levels and n_iterations >= 1):
        raise ValueError("every sweep axis must be non-empty")

    coords = [
        (name, rec, cfg, algo, snr, it)
        for name, rec in datasets
        for cfg in configs
        for algo in algorithms
        for snr in snr_levels
        for it in range(n_iterations)
    ]

    def one(coord):
        name, rec, cfg, algo, snr, it = coord
        try:
            return run_trial(rec, name, cfg, algo, snr, it, master_seed,
                             segment_samples, opts, reference_label)
        except Exception as exc:
            return TrialError(name, cfg.name, algo, snr, it, str(exc))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(one, coords))
    else:
        outcomes = [one(c) for c in coords]

    rows = [o for o in outcomes if isinstance(o, TrialResult)]
    errors = [o for o in outcomes if isinstance(o, TrialError)]
    return SweepResult(rows=rows, errors=errors)


def degradation(rho_0: float, rho_gamma: float) -> float:
    """Relative performance drop ``(rho_0 - rho_gamma) / rho_0``."""
    if rho_0 <= 0:
        raise ValueError(f"baseline score must be positive, got {rho_0}")
    return (rho_0 - rho_gamma) / rho_0


def degradation_record(rho_0: float, rho_gamma: float) -> DegradationRecord:
    return DegradationRecord(rho_0, rho_gamma, degradation(rho_0, rho_gamma))


def aggregate(rows) -> list:
    """Per-(dataset, config, algorithm, snr) summaries with degradation.

    Degradation q compares each group's mean score against the matching
    baseline group (``snr_db = inf``); groups without a baseline keep
    ``q = None``. Standard deviations use the population convention.
    Summary order follows first appearance in ``rows``.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("cannot aggregate an empty result table")
    groups: dict = {}
    order = []
    for row in rows:
        key = (row.dataset, row.config, row.algorithm, row.snr_db)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(row)

    baselines = {}
    for (dataset, config, algorithm, snr), members in groups.items():
        if math.isinf(snr) and snr > 0:
            baselines[(dataset, config, algorithm)] = float(
                np.mean([r.rho for r in members])
            )

    summaries = []
    for key in order:
        dataset, config, algorithm, snr = key
        members = groups[key]
        rhos = np.array([r.rho for r in members])
        times = np.array([r.fit_time_s for r in members])
        rho_0 = baselines.get((dataset, config, algorithm))
        q = degradation(rho_0, float(rhos.mean())) if rho_0 is not None else None
        summaries.append(GroupSummary(
            dataset=dataset, config=config, algorithm=algorithm, snr_db=snr,
            n_trials=len(members),
            mean_rho=float(rhos.mean()), std_rho=float(rhos.std()),
            mean_time_s=float(times.mean()), std_time_s=float(times.std()),
            convergence_rate=float(np.mean([r.converged for r in members])),
            rho_baseline=rho_0, q=q,
        ))
    return summaries


def summary_tree(summaries) -> dict:
    """Nested dataset -> config -> algorithm -> snr mapping for JSON export."""
    tree: dict = {}
    for s in summaries:
        leaf = (tree.setdefault(s.dataset, {})
                    .setdefault(s.config, {})
                    .setdefault(s.algorithm, {}))
        leaf[_snr_label(s.snr_db)] = {
            "n_trials": s.n_trials,
            "mean_rho": s.mean_rho,
            "std_rho": s.std_rho,
            "mean_time_s": s.mean_time_s,
            "std_time_s": s.std_time_s,
            "convergence_rate": s.convergence_rate,
            "q": s.q,
        }
    return tree


def _snr_label(snr_db: float) -> str:
    return "inf" if (math.isinf(snr_db) and snr_db > 0) else repr(float(snr_db))


def export_component_weights(model: IcaModel, component: int):
    """Per-channel mixing weights of one component, for topography plots.

    Returns ``(labels, weights)`` where weights are the component's
    column of the estimated mixing matrix.
    """
    if not 0 <= component < model.n_components:
        raise IndexError(
            f"component {component} out of range [0, {model.n_components})"
        )
    return list(model.channel_labels), model.A_hat[:, component].copy()


def write_results_csv(rows, path) -> None:
    """Trial table as CSV; the baseline level is written as ``inf``."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULTS_CSV_COLUMNS)
        for r in rows:
            writer.writerow([
                r.dataset, r.config, r.algorithm, repr(float(r.snr_db)),
                r.iteration, repr(float(r.rho)), r.best_component,
                repr(float(r.fit_time_s)), r.iterations_used,
                "true" if r.converged else "false", r.segment_start, r.seed,
            ])


def read_results_csv(path) -> list:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != RESULTS_CSV_COLUMNS:
            raise ValueError(
                f"unexpected results header {header!r}; "
                f"expected {list(RESULTS_CSV_COLUMNS)}"
            )
        rows = []
        for record in reader:
            if not record:
                continue
            (dataset, config, algorithm, snr, iteration, rho, best, fit_time,
             iters, converged, start, seed) = record
            rows.append(TrialResult(
                dataset=dataset, config=config, algorithm=algorithm,
                snr_db=float(snr), iteration=int(iteration), rho=float(rho),
                best_component=int(best), fit_time_s=float(fit_time),
                iterations_used=int(iters), converged=converged == "true",
                segment_start=int(start), seed=int(seed),
            ))
    return rows


def write_summary_json(summaries, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary_tree(summaries), fh, indent=2, sort_keys=True)
        fh.write("\n")
