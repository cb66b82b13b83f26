"""Multichannel recording container and its text serialization.

All voltages are in microvolts. A recording is a channels-by-samples
matrix plus per-channel labels and roles. Roles decide how downstream
stages treat a channel: only ``measurement`` channels enter source
separation and noise injection, while ``eog`` and ``reference`` channels
ride along untouched for scoring and bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MEASUREMENT = "measurement"
EOG = "eog"
REFERENCE = "reference"
VALID_ROLES = (MEASUREMENT, EOG, REFERENCE)


class RecordingFormatError(ValueError):
    """A recording file does not match the documented CSV layout."""


@dataclass
class Recording:
    """Voltage matrix (uV), rows = channels, columns = time samples.

    Parameters
    ----------
    data : ndarray, shape (n_channels, n_samples)
    fs : float
        Sampling frequency in Hz.
    labels : list of str
        Unique channel names, one per row.
    roles : list of str
        Per-channel role, one of ``measurement``, ``eog``, ``reference``.
    """

    data: np.ndarray
    fs: float
    labels: list = field(default_factory=list)
    roles: list = field(default_factory=list)

    def __post_init__(self):
        self.data = np.atleast_2d(np.asarray(self.data, dtype=np.float64))
        self.labels = [str(x) for x in self.labels]
        self.roles = [str(x) for x in self.roles]
        if self.fs <= 0:
            raise ValueError(f"fs must be positive, got {self.fs}")
        if self.data.ndim != 2:
            raise ValueError("data must be a 2-D channels x samples matrix")
        if self.data.shape[1] < 1:
            raise ValueError("recording must contain at least one sample")
        n = self.data.shape[0]
        if len(self.labels) != n or len(self.roles) != n:
            raise ValueError(
                f"labels ({len(self.labels)}) and roles ({len(self.roles)}) "
                f"must both match the channel count ({n})"
            )
        if len(set(self.labels)) != n:
            dupes = sorted({x for x in self.labels if self.labels.count(x) > 1})
            raise ValueError(f"channel names must be unique, duplicated: {dupes}")
        for label, role in zip(self.labels, self.roles):
            if role not in VALID_ROLES:
                raise ValueError(
                    f"channel {label!r} has invalid role {role!r}; "
                    f"expected one of {VALID_ROLES}"
                )

    @property
    def n_channels(self) -> int:
        return self.data.shape[0]

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]

    @property
    def duration(self) -> float:
        """Length of the recording in seconds."""
        return self.n_samples / self.fs

    def role_indices(self, role: str) -> list:
        return [i for i, r in enumerate(self.roles) if r == role]

    @property
    def measurement_indices(self) -> list:
        return self.role_indices(MEASUREMENT)

    @property
    def measurement_labels(self) -> list:
        return [self.labels[i] for i in self.measurement_indices]

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"no channel labeled {label!r}") from None

    def with_data(self, data: np.ndarray) -> "Recording":
        """Same channels and rate, new sample matrix."""
        return Recording(np.asarray(data, dtype=np.float64),
                         self.fs, list(self.labels), list(self.roles))

    def select(self, indices) -> "Recording":
        """Sub-recording with the given channel rows, order preserved."""
        indices = list(indices)
        return Recording(self.data[indices].copy(), self.fs,
                         [self.labels[i] for i in indices],
                         [self.roles[i] for i in indices])

    def copy(self) -> "Recording":
        return Recording(self.data.copy(), self.fs,
                         list(self.labels), list(self.roles))


def write_recording_csv(rec: Recording, path) -> None:
    """Write a recording as headered CSV.

    Layout: comment headers ``# fs=...``, ``# labels=...``, ``# roles=...``
    followed by one comma-separated row per time sample, channels in label
    order. Values use shortest round-trip decimal form, so a read-back is
    bit-exact.
    """
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# fs={rec.fs!r}\n")
        fh.write("# labels=" + ",".join(rec.labels) + "\n")
        fh.write("# roles=" + ",".join(rec.roles) + "\n")
        for t in range(rec.n_samples):
            fh.write(",".join(repr(v) for v in rec.data[:, t].tolist()))
            fh.write("\n")


def read_recording_csv(path) -> Recording:
    """Read a recording written by :func:`write_recording_csv`.

    Raises
    ------
    RecordingFormatError
        With a distinct message for a missing header field, a ragged data
        row, or a non-numeric cell.
    """
    header = {}
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" not in body:
                    raise RecordingFormatError(
                        f"line {lineno}: header comment without key=value: {line!r}"
                    )
                key, value = body.split("=", 1)
                header[key.strip()] = value
                continue
            rows.append((lineno, line))

    for required in ("fs", "labels", "roles"):
        if required not in header:
            raise RecordingFormatError(f"missing required header field '{required}'")

    try:
        fs = float(header["fs"])
    except ValueError:
        raise RecordingFormatError(
            f"header field 'fs' is not numeric: {header['fs']!r}"
        ) from None
    labels = [x.strip() for x in header["labels"].split(",")]
    roles = [x.strip() for x in header["roles"].split(",")]
    if not rows:
        raise RecordingFormatError("file contains no data rows")

    n_channels = len(labels)
    data = np.empty((len(rows), n_channels), dtype=np.float64)
    for r, (lineno, line) in enumerate(rows):
        cells = line.split(",")
        if len(cells) != n_channels:
            raise RecordingFormatError(
                f"line {lineno}: row has {len(cells)} values, expected {n_channels}"
            )
        for c, cell in enumerate(cells):
            try:
                data[r, c] = float(cell)
            except ValueError:
                raise RecordingFormatError(
                    f"line {lineno}, channel {labels[c]!r}: "
                    f"non-numeric cell {cell.strip()!r}"
                ) from None

    return Recording(data.T, fs, labels, roles)
