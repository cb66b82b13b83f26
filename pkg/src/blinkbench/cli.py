"""Command-line front end: synth, sweep, report, characterize.

Every command is driven by a JSON run configuration and a master seed,
and is idempotent: identical inputs produce identical output files
(wall-clock fit times excepted). The default configuration mirrors the
full-scale experiment (0-20 dB in 2.5 dB steps, 100 iterations, 60,000
sample segments, six datasets); ``--quick`` swaps in a small preset
suitable for CI.

Exit codes: 0 success, 1 user/configuration error, 2 internal or trial
failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import bench, synth
from .recording import read_recording_csv, write_recording_csv
from .signals import gaussianity_stats

MONTAGES = {
    "desk8": synth.DESK_MONTAGE_8,
    "full28": synth.FULL_MONTAGE_28,
}


class ConfigError(ValueError):
    """A run configuration field is missing or invalid."""


@dataclass
class RunConfig:
    montage: tuple
    fs: float
    duration_s: float
    blink_amplitude_uv: float
    channel_rms_uv: float
    n_datasets: int
    electrode_configs: list
    algorithms: list
    snr_start_db: float
    snr_stop_db: float
    snr_step_db: float
    include_baseline: bool
    n_iterations: int
    segment_samples: int
    master_seed: int
    output_dir: str

    def snr_levels(self) -> list:
        levels = []
        if self.include_baseline:
            levels.append(bench.BASELINE_SNR)
        k = 0
        while True:
            value = self.snr_start_db + k * self.snr_step_db
            if value > self.snr_stop_db + 1e-9:
                break
            levels.append(round(value, 9))
            k += 1
        return levels

    def resolve_configs(self):
        configs = []
        for entry in self.electrode_configs:
            if isinstance(entry, str):
                configs.append(bench.standard_config(entry, self.montage))
            else:
                configs.append(bench.ElectrodeConfig(entry["name"], tuple(entry["channels"])))
        return configs


DEFAULT_CONFIG = {
    "synthesis": {
        "montage": "full28",
        "fs": 1000.0,
        "duration_s": 300.0,
        "blink_amplitude_uv": 100.0,
        "channel_rms_uv": 20.0,
    },
    "n_datasets": 6,
    "electrode_configs": ["all", "com9", "em8", "att8", "mi10"],
    "algorithms": ["fastica_deflation", "infomax"],
    "snr_grid_db": {"start": 0.0, "stop": 20.0, "step": 2.5},
    "include_baseline": True,
    "n_iterations": 100,
    "segment_samples": 60000,
    "master_seed": 42,
    "output_dir": "runs/full",
}

QUICK_CONFIG = {
    "synthesis": {
        "montage": ["FP1", "FP2", "F3", "F4", "C3", "C4"],
        "fs": 200.0,
        "duration_s": 100.0,
        "blink_amplitude_uv": 100.0,
        "channel_rms_uv": 20.0,
    },
    "n_datasets": 2,
    "electrode_configs": [
        "all",
        {"name": "front4", "channels": ["FP1", "FP2", "F3", "F4"]},
    ],
    "algorithms": ["fastica_deflation", "infomax"],
    "snr_grid_db": {"start": 0.0, "stop": 20.0, "step": 10.0},
    "include_baseline": True,
    "n_iterations": 10,
    "segment_samples": 8000,
    "master_seed": 42,
    "output_dir": "runs/quick",
}


def _require(mapping, key, kind, where):
    if key not in mapping:
        raise ConfigError(f"missing field {where}{key}")
    value = mapping[key]
    if kind is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if kind is int and isinstance(value, int) and not isinstance(value, bool):
        return value
    if kind is bool and isinstance(value, bool):
        return value
    if kind in (list, str, dict) and isinstance(value, kind):
        return value
    raise ConfigError(f"field {where}{key} must be a {kind.__name__}")


def load_config(raw: dict) -> RunConfig:
    """Validate a raw configuration mapping; messages name the field."""
    synthesis = _require(raw, "synthesis", dict, "")
    if "montage" not in synthesis:
        raise ConfigError("missing field synthesis.montage")
    montage = synthesis["montage"]
    if isinstance(montage, str):
        if montage not in MONTAGES:
            raise ConfigError(
                f"synthesis.montage must be one of {sorted(MONTAGES)} or a label list"
            )
        montage = MONTAGES[montage]
    elif isinstance(montage, list):
        montage = tuple(str(x) for x in montage)
    else:
        raise ConfigError("synthesis.montage must be a montage name or a label list")

    grid = _require(raw, "snr_grid_db", dict, "")
    cfg = RunConfig(
        montage=tuple(montage),
        fs=_require(synthesis, "fs", float, "synthesis."),
        duration_s=_require(synthesis, "duration_s", float, "synthesis."),
        blink_amplitude_uv=_require(synthesis, "blink_amplitude_uv", float, "synthesis."),
        channel_rms_uv=_require(synthesis, "channel_rms_uv", float, "synthesis."),
        n_datasets=_require(raw, "n_datasets", int, ""),
        electrode_configs=_require(raw, "electrode_configs", list, ""),
        algorithms=_require(raw, "algorithms", list, ""),
        snr_start_db=_require(grid, "start", float, "snr_grid_db."),
        snr_stop_db=_require(grid, "stop", float, "snr_grid_db."),
        snr_step_db=_require(grid, "step", float, "snr_grid_db."),
        include_baseline=_require(raw, "include_baseline", bool, ""),
        n_iterations=_require(raw, "n_iterations", int, ""),
        segment_samples=_require(raw, "segment_samples", int, ""),
        master_seed=_require(raw, "master_seed", int, ""),
        output_dir=_require(raw, "output_dir", str, ""),
    )

    if cfg.snr_step_db <= 0:
        raise ConfigError("snr_grid_db.step must be > 0")
    if cfg.snr_stop_db < cfg.snr_start_db:
        raise ConfigError("snr_grid_db.stop must be >= snr_grid_db.start")
    if cfg.n_iterations < 1:
        raise ConfigError("n_iterations must be >= 1")
    if cfg.segment_samples < 1:
        raise ConfigError("segment_samples must be >= 1")
    if cfg.n_datasets < 1:
        raise ConfigError("n_datasets must be >= 1")
    if not cfg.electrode_configs:
        raise ConfigError("electrode_configs must be non-empty")
    if not cfg.algorithms:
        raise ConfigError("algorithms must be non-empty")
    for entry in cfg.electrode_configs:
        if isinstance(entry, str):
            if entry != "all" and entry not in bench.STANDARD_SUBSETS:
                raise ConfigError(
                    f"electrode_configs entry {entry!r} is not a known name; "
                    "use 'all', a standard subset, or a {name, channels} object"
                )
        elif isinstance(entry, dict):
            if "name" not in entry or "channels" not in entry:
                raise ConfigError(
                    "custom electrode_configs entries need 'name' and 'channels'"
                )
        else:
            raise ConfigError("electrode_configs entries must be names or objects")
    for algo in cfg.algorithms:
        if algo not in ("fastica", "fastica_deflation", "fastica_parallel", "infomax"):
            raise ConfigError(f"algorithms entry {algo!r} is not a known algorithm")
    if cfg.segment_samples > int(round(cfg.duration_s * cfg.fs)):
        raise ConfigError(
            "segment_samples exceeds the synthesized recording length "
            f"({int(round(cfg.duration_s * cfg.fs))} samples)"
        )
    return cfg


def _read_config_file(args) -> RunConfig:
    if args.quick:
        raw = json.loads(json.dumps(QUICK_CONFIG))
    elif args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{args.config}: not valid JSON ({exc})") from None
    else:
        raw = json.loads(json.dumps(DEFAULT_CONFIG))
    if args.seed is not None:
        raw["master_seed"] = args.seed
    if args.out is not None:
        raw["output_dir"] = args.out
    return load_config(raw)


def _dataset_spec(cfg: RunConfig, index: int) -> synth.SynthSpec:
    seed = int(np.random.SeedSequence([cfg.master_seed, index]).generate_state(1)[0])
    return synth.SynthSpec(
        labels=cfg.montage, fs=cfg.fs, duration=cfg.duration_s,
        channel_rms=cfg.channel_rms_uv, blink_amplitude=cfg.blink_amplitude_uv,
        seed=seed,
    )


def _dataset_paths(cfg: RunConfig):
    out = Path(cfg.output_dir)
    return [
        (f"dataset_{k:02d}", out / f"dataset_{k:02d}.csv", out / f"dataset_{k:02d}.truth.json")
        for k in range(cfg.n_datasets)
    ]


def cmd_synth(args) -> int:
    cfg = _read_config_file(args)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    for k, (name, rec_path, truth_path) in enumerate(_dataset_paths(cfg)):
        dataset = synth.make_blink_dataset(_dataset_spec(cfg, k))
        write_recording_csv(dataset.recording, rec_path)
        truth = {
            "dataset": name,
            "fs": cfg.fs,
            "blink_timestamps_s": dataset.schedule.timestamps.tolist(),
            "kernel_uv": dataset.schedule.kernel.tolist(),
            "topography": {
                label: weight for label, weight in
                zip(dataset.recording.labels, dataset.schedule.topography.tolist())
            },
            "reference_label": dataset.reference_label,
        }
        with open(truth_path, "w", encoding="utf-8") as fh:
            json.dump(truth, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(rec_path)
        print(truth_path)
    return 0


def cmd_sweep(args) -> int:
    cfg = _read_config_file(args)
    workers = 1 if args.serial_timing else max(1, args.workers)
    datasets = []
    for name, rec_path, _ in _dataset_paths(cfg):
        if not rec_path.exists():
            print(f"missing dataset file {rec_path}; run 'synth' first",
                  file=sys.stderr)
            return 1
        datasets.append((name, read_recording_csv(rec_path)))

    result = bench.run_sweep(
        datasets=datasets,
        configs=cfg.resolve_configs(),
        algorithms=cfg.algorithms,
        snr_levels=cfg.snr_levels(),
        n_iterations=cfg.n_iterations,
        master_seed=cfg.master_seed,
        segment_samples=cfg.segment_samples,
        workers=workers,
    )
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    bench.write_results_csv(result.rows, out / "results.csv")
    print(out / "results.csv")
    if result.rows:
        bench.write_summary_json(bench.aggregate(result.rows), out / "summary.json")
        print(out / "summary.json")
    for err in result.errors:
        print(
            f"trial failed: dataset={err.dataset} config={err.config} "
            f"algorithm={err.algorithm} snr_db={err.snr_db} "
            f"iteration={err.iteration}: {err.message}",
            file=sys.stderr,
        )
    return 0 if result.ok else 2


def _pooled(rows):
    """Aggregate rows over datasets and iterations per (config, algorithm, snr)."""
    groups: dict = {}
    for row in rows:
        groups.setdefault((row.config, row.algorithm, row.snr_db), []).append(row)
    keys = sorted(groups, key=lambda k: (k[0], k[1], k[2]))
    pooled = {}
    for key in keys:
        members = groups[key]
        rhos = np.array([r.rho for r in members])
        times = np.array([r.fit_time_s for r in members])
        pooled[key] = {
            "n": len(members),
            "mean_rho": float(rhos.mean()),
            "std_rho": float(rhos.std()),
            "mean_time_s": float(times.mean()),
            "std_time_s": float(times.std()),
        }
    return pooled


def cmd_report(args) -> int:
    results_path = Path(args.results)
    rows = bench.read_results_csv(results_path)
    if not rows:
        print(f"{results_path}: no result rows", file=sys.stderr)
        return 1
    out = Path(args.out) if args.out else results_path.parent
    out.mkdir(parents=True, exist_ok=True)

    pooled = _pooled(rows)
    baselines = {
        (config, algorithm): stats["mean_rho"]
        for (config, algorithm, snr), stats in pooled.items()
        if math.isinf(snr) and snr > 0
    }

    corr_path = out / "correlation_vs_snr.csv"
    with open(corr_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["config", "algorithm", "snr_db", "mean_rho", "std_rho", "n"])
        for (config, algorithm, snr), stats in pooled.items():
            writer.writerow([config, algorithm, repr(float(snr)),
                             repr(stats["mean_rho"]), repr(stats["std_rho"]),
                             stats["n"]])

    degr_path = out / "degradation_vs_snr.csv"
    with open(degr_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["config", "algorithm", "snr_db", "q"])
        wrote_any = False
        for (config, algorithm, snr), stats in pooled.items():
            if math.isinf(snr):
                continue
            rho_0 = baselines.get((config, algorithm))
            if rho_0 is None:
                continue
            writer.writerow([config, algorithm, repr(float(snr)),
                             repr(bench.degradation(rho_0, stats["mean_rho"]))])
            wrote_any = True
    if not wrote_any:
        print("warning: results contain no baseline rows; "
              "degradation table is empty", file=sys.stderr)

    time_path = out / "time_vs_snr.csv"
    with open(time_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["config", "algorithm", "snr_db", "mean_time_s", "std_time_s"])
        for (config, algorithm, snr), stats in pooled.items():
            writer.writerow([config, algorithm, repr(float(snr)),
                             repr(stats["mean_time_s"]), repr(stats["std_time_s"])])

    print(corr_path)
    print(degr_path)
    print(time_path)
    return 0


def cmd_characterize(args) -> int:
    samples = []
    with open(args.samples, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                samples.append(float(text))
            except ValueError:
                print(f"{args.samples}: line {lineno}: non-numeric value {text!r}",
                      file=sys.stderr)
                return 1
    report = gaussianity_stats(np.asarray(samples))
    print(f"n                {len(samples)}")
    print(f"mean             {report.mean:.6g}")
    print(f"std              {report.std:.6g}")
    print(f"skewness         {report.skewness:.6g}")
    print(f"kurtosis         {report.kurtosis:.6g}")
    print(f"max_cdf_distance {report.max_cdf_distance:.6g}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "gaussianity_report.json", "w", encoding="utf-8") as fh:
            json.dump(report.as_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(out / "gaussianity_report.json")
    return 0


class _Parser(argparse.ArgumentParser):
    # usage problems are user errors: exit 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="blinkbench",
                     description="Synthetic-EEG ICA benchmark under calibrated noise")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON run configuration path")
        p.add_argument("--out", help="output directory (overrides config)")
        p.add_argument("--seed", type=int, help="master seed (overrides config)")
        p.add_argument("--workers", type=int, default=1,
                       help="parallel trial workers (default 1)")
        p.add_argument("--quick", action="store_true",
                       help="use the small CI preset instead of a config file")
        p.add_argument("--serial-timing", action="store_true",
                       help="force workers=1 so fit timings are uncontended")

    p_synth = sub.add_parser("synth", help="write synthetic datasets and ground truth")
    common(p_synth)
    p_synth.set_defaults(func=cmd_synth)

    p_sweep = sub.add_parser("sweep", help="run the Monte Carlo SNR sweep")
    common(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_report = sub.add_parser("report", help="emit plot-ready tables from results")
    p_report.add_argument("results", help="path to results.csv")
    p_report.add_argument("--out", help="output directory (default: alongside results)")
    p_report.set_defaults(func=cmd_report)

    p_char = sub.add_parser("characterize",
                            help="moment/CDF Gaussianity report for a sample file")
    p_char.add_argument("samples", help="single-column numeric text file")
    p_char.add_argument("--out", help="directory for the JSON report")
    p_char.set_defaults(func=cmd_characterize)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"file not found: {exc.filename or exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


def entry():
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
