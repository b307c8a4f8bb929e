"""Bearing vibration data: class taxonomy, synthesis, storage, and splits.

The canonical label set covers three defect locations (inner race, outer
race, rolling element) at three severities each, plus the healthy baseline.
Synthetic recordings follow the standard vibration model: a shaft-rate
sinusoid, plus — for faulty classes — repetitive impulse bursts at the
location's characteristic defect frequency, each burst an exponentially
decaying resonance tone, all in Gaussian noise.

The shaft frequency is snapped to an integer number of samples per
revolution so that the seasonal component of a clean healthy recording is
exactly periodic; severities scale burst amplitude linearly.

``build_dataset`` turns recordings into standardized token segments with a
deterministic contiguous train/validation/test split: within each class,
segments are kept in time order and the earliest go to training, the latest
to test, so evaluation always happens on later data than the model saw.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .decompose import TimeSeries, decompose_additive, estimate_period
from .features import (
    CHANNEL_MAP,
    FEATURE_NAMES,
    Standardizer,
    WindowSpec,
    featurize,
)
from .matio import read_mat
from .movavg import MaConfig

__all__ = [
    "FaultClass",
    "FAULT_CLASSES",
    "CLASS_ORDER",
    "SynthConfig",
    "SplitConfig",
    "DatasetSplits",
    "gen_recording",
    "gen_synthetic",
    "save_recordings",
    "load_recordings",
    "load_recording_csv",
    "load_recordings_mat",
    "build_dataset",
]

STORE_FORMAT = "tdafault-recordings-v1"
FEATURES_FORMAT = "tdafault-features-v1"

SHAFT_RPM = 1772.0

# Characteristic defect frequencies as multiples of the shaft rotation rate.
DEFECT_RATE_PER_REV = {"inner": 5.4, "outer": 3.6, "ball": 4.7}

# Each location rings its own structural resonance, with its own burst
# polarity (phase) and relative strength; severity scales amplitude on top.
RESONANCE_HZ = {"inner": 1100.0, "outer": 700.0, "ball": 900.0}
BURST_PHASE = {"inner": 0.5 * np.pi, "outer": -0.5 * np.pi, "ball": 0.0}
LOCATION_AMPLITUDE = {"inner": 1.0, "outer": 1.15, "ball": 0.85}


@dataclass(frozen=True)
class FaultClass:
    """One diagnosis label: defect location and severity (inches)."""

    name: str
    location: str  # "inner" | "outer" | "ball" | "none"
    severity_inch: float


FAULT_CLASSES = (
    FaultClass("IR_007_1", "inner", 0.007),
    FaultClass("IR_014_1", "inner", 0.014),
    FaultClass("IR_021_1", "inner", 0.021),
    FaultClass("OR_007_6_1", "outer", 0.007),
    FaultClass("OR_014_6_1", "outer", 0.014),
    FaultClass("OR_021_6_1", "outer", 0.021),
    FaultClass("Ball_007_1", "ball", 0.007),
    FaultClass("Ball_014_1", "ball", 0.014),
    FaultClass("Ball_021_1", "ball", 0.021),
    FaultClass("Normal_1", "none", 0.0),
)
CLASS_ORDER = tuple(fc.name for fc in FAULT_CLASSES)
_CLASS_BY_NAME = {fc.name: fc for fc in FAULT_CLASSES}
_SEVERITY_UNIT = 0.007  # smallest defect size; amplitudes scale from here


def shaft_period_samples(sample_rate_hz: float, rpm: float = SHAFT_RPM) -> int:
    """Samples per shaft revolution, rounded to the nearest integer."""
    period = int(round(sample_rate_hz * 60.0 / rpm))
    if period < 2:
        raise ValueError(
            f"sample rate {sample_rate_hz} Hz too low for {rpm} rpm (period {period})"
        )
    return period


@dataclass(frozen=True)
class SynthConfig:
    """Synthetic recording parameters (desk-scale defaults)."""

    sample_rate_hz: float = 4096.0
    duration_s: float = 8.0
    recordings_per_class: int = 4
    noise_sigma: float = 0.1
    shaft_rpm: float = SHAFT_RPM
    shaft_amplitude: float = 1.0
    burst_amplitude: float = 1.2
    burst_decay_s: float = 1e-3
    seed: int = 0

    def __post_init__(self) -> None:
        if self.sample_rate_hz <= 0 or self.duration_s <= 0:
            raise ValueError("sample_rate_hz and duration_s must be positive")
        if self.recordings_per_class < 1:
            raise ValueError("recordings_per_class must be >= 1")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if self.burst_decay_s <= 0:
            raise ValueError("burst_decay_s must be positive")

    @property
    def shaft_hz(self) -> float:
        """Shaft rate after snapping to a whole number of samples."""
        return self.sample_rate_hz / shaft_period_samples(self.sample_rate_hz, self.shaft_rpm)


def _burst_prototype(cfg: SynthConfig, location: str) -> np.ndarray:
    fs = cfg.sample_rate_hz
    length = max(4, int(round(6.0 * cfg.burst_decay_s * fs)))
    t = np.arange(length) / fs
    return np.exp(-t / cfg.burst_decay_s) * np.sin(
        2.0 * np.pi * RESONANCE_HZ[location] * t + BURST_PHASE[location]
    )


def gen_recording(fault: FaultClass, cfg: SynthConfig, rec_idx: int) -> TimeSeries:
    """Synthesize one labelled recording, reproducible from (seed, class, rec)."""
    class_idx = CLASS_ORDER.index(fault.name)
    rng = np.random.default_rng([cfg.seed, class_idx, rec_idx])
    fs = cfg.sample_rate_hz
    n = int(round(fs * cfg.duration_s))
    t = np.arange(n) / fs

    phase = rng.uniform(0.0, 2.0 * np.pi)
    x = cfg.shaft_amplitude * np.sin(2.0 * np.pi * cfg.shaft_hz * t + phase)

    if fault.location != "none":
        rate_hz = DEFECT_RATE_PER_REV[fault.location] * cfg.shaft_hz
        spacing = fs / rate_hz  # samples between impacts (fractional)
        offset = rng.uniform(0.0, spacing)
        proto = _burst_prototype(cfg, fault.location)
        amp = (
            cfg.burst_amplitude
            * LOCATION_AMPLITUDE[fault.location]
            * (fault.severity_inch / _SEVERITY_UNIT)
        )
        starts = np.round(offset + spacing * np.arange(int(n / spacing) + 1)).astype(int)
        starts = starts[starts < n]
        idx = starts[:, None] + np.arange(proto.size)[None, :]
        keep = idx < n
        np.add.at(x, idx[keep], amp * np.broadcast_to(proto, idx.shape)[keep])

    if cfg.noise_sigma > 0:
        x = x + rng.normal(0.0, cfg.noise_sigma, n)
    return TimeSeries(samples=x, sample_rate_hz=fs, label=fault.name)


def gen_synthetic(cfg: SynthConfig) -> list[TimeSeries]:
    """All classes x recordings in canonical order (class-major)."""
    return [
        gen_recording(fault, cfg, rec_idx)
        for fault in FAULT_CLASSES
        for rec_idx in range(cfg.recordings_per_class)
    ]


# ---- recording store --------------------------------------------------------


def _dump_json(path: Path, obj: dict) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def save_recordings(
    dirpath, recordings, *, meta: dict | None = None, created: str | None = None
) -> dict:
    """Write recordings to a directory store (one .npy each plus a manifest).

    The manifest carries only input-derived fields (``created`` stays null
    unless supplied), so identical inputs produce byte-identical stores.
    Returns the manifest dict.
    """
    if not recordings:
        raise ValueError("no recordings to save")
    dirpath = Path(dirpath)
    dirpath.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, ts in enumerate(recordings):
        key = f"rec_{i:05d}"
        np.save(dirpath / f"{key}.npy", np.asarray(ts.samples, dtype=np.float64))
        entries.append(
            {
                "key": key,
                "label": ts.label,
                "sample_rate_hz": float(ts.sample_rate_hz),
                "n_samples": int(len(ts)),
            }
        )
    manifest = {
        "format": STORE_FORMAT,
        "created": created,
        "meta": meta or {},
        "recordings": entries,
    }
    _dump_json(dirpath / "manifest.json", manifest)
    return manifest


def load_recordings(dirpath) -> list[TimeSeries]:
    """Read a directory store written by :func:`save_recordings`."""
    dirpath = Path(dirpath)
    manifest = json.loads((dirpath / "manifest.json").read_text())
    if manifest.get("format") != STORE_FORMAT:
        raise ValueError(f"unrecognized store format {manifest.get('format')!r}")
    out = []
    for entry in manifest["recordings"]:
        samples = np.load(dirpath / f"{entry['key']}.npy")
        out.append(
            TimeSeries(
                samples=samples,
                sample_rate_hz=entry["sample_rate_hz"],
                label=entry["label"],
            )
        )
    return out


def load_recording_csv(path, sample_rate_hz: float, label: str | None = None) -> TimeSeries:
    """One recording from a CSV of samples (first column if multi-column)."""
    arr = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    return TimeSeries(samples=arr[:, 0], sample_rate_hz=sample_rate_hz, label=label)


def load_recordings_mat(
    path, sample_rate_hz: float, label: str | None = None, var_names=None
) -> list[TimeSeries]:
    """Recordings from numeric MAT variables (column-major flattening).

    ``var_names`` selects and orders the variables; by default all decoded
    variables are used in name order.
    """
    arrays = read_mat(path)
    names = list(var_names) if var_names is not None else sorted(arrays)
    out = []
    for name in names:
        if name not in arrays:
            raise KeyError(f"variable {name!r} not found in {path}")
        samples = np.asarray(arrays[name].data, dtype=np.float64).ravel(order="F")
        out.append(TimeSeries(samples=samples, sample_rate_hz=sample_rate_hz, label=label))
    return out


# ---- tokens, segments, splits ----------------------------------------------


@dataclass(frozen=True)
class SplitConfig:
    """Segment geometry and contiguous split fractions."""

    segment_len: int = 16
    train_fraction: float = 0.7
    val_fraction: float = 0.15

    def __post_init__(self) -> None:
        if self.segment_len < 1:
            raise ValueError("segment_len must be >= 1")
        if not 0.0 < self.train_fraction < 1.0 or not 0.0 <= self.val_fraction < 1.0:
            raise ValueError("fractions must lie in (0, 1)")
        if self.train_fraction + self.val_fraction >= 1.0:
            raise ValueError("train_fraction + val_fraction must leave room for test")


def segment_tokens(tokens: np.ndarray, segment_len: int) -> list[np.ndarray]:
    """Non-overlapping (segment_len, F) blocks in time order; tail dropped."""
    n_full = tokens.shape[0] // segment_len
    return [tokens[i * segment_len:(i + 1) * segment_len] for i in range(n_full)]


def split_counts(n: int, cfg: SplitConfig) -> tuple[int, int, int]:
    """(train, val, test) sizes: round-half-up, then repair so none is empty."""
    if n < 3:
        raise ValueError(f"need at least 3 segments per class to split, got {n}")
    n_tr = int(n * cfg.train_fraction + 0.5)
    n_va = int(n * cfg.val_fraction + 0.5)
    counts = [n_tr, n_va, n - n_tr - n_va]
    while min(counts) < 1:
        counts[counts.index(max(counts))] -= 1
        counts[counts.index(min(counts))] += 1
    return counts[0], counts[1], counts[2]


def class_labels_for(recordings) -> tuple[str, ...]:
    """Distinct labels, in canonical order when they all belong to it."""
    present = []
    for ts in recordings:
        if ts.label is None:
            raise ValueError("all recordings need a label to build a dataset")
        if ts.label not in present:
            present.append(ts.label)
    if all(name in _CLASS_BY_NAME for name in present):
        return tuple(name for name in CLASS_ORDER if name in present)
    return tuple(sorted(present))


@dataclass
class DatasetSplits:
    """Standardized (tokens, class index) examples plus fit metadata."""

    train: list
    val: list
    test: list
    labels: tuple[str, ...]
    standardizer: Standardizer
    manifest: dict

    def split(self, name: str) -> list:
        return {"train": self.train, "val": self.val, "test": self.test}[name]


def build_dataset(
    recordings,
    *,
    window: WindowSpec | None = None,
    ma: MaConfig | None = None,
    split: SplitConfig | None = None,
    period_hint_hz: float | None = None,
) -> DatasetSplits:
    """Decompose, featurize, segment, split, and standardize recordings.

    Within each class, segments stay in time order (recording-major) and are
    split contiguously: earliest to train, then validation, latest to test.
    The standardizer is fitted on training tokens only and applied to all
    three splits.
    """
    window = window or WindowSpec()
    ma = ma or MaConfig(window=16)
    split = split or SplitConfig()
    labels = class_labels_for(recordings)
    label_to_idx = {name: i for i, name in enumerate(labels)}

    per_class_segments: dict[str, list[np.ndarray]] = {name: [] for name in labels}
    recording_entries = []
    for ts in recordings:
        period = estimate_period(ts, period_hint_hz)
        decomp = decompose_additive(ts, period)
        seq = featurize(decomp, window, ma=ma, label=ts.label)
        segments = segment_tokens(seq.tokens, split.segment_len)
        per_class_segments[ts.label].extend(segments)
        recording_entries.append(
            {
                "label": ts.label,
                "n_samples": int(len(ts)),
                "period": int(period),
                "n_tokens": int(len(seq)),
                "n_segments": len(segments),
            }
        )

    assignments: dict[str, dict[str, list[np.ndarray]]] = {}
    split_table = {}
    for name in labels:
        segments = per_class_segments[name]
        n_tr, n_va, n_te = split_counts(len(segments), split)
        assignments[name] = {
            "train": segments[:n_tr],
            "val": segments[n_tr:n_tr + n_va],
            "test": segments[n_tr + n_va:],
        }
        split_table[name] = {"train": n_tr, "val": n_va, "test": n_te}

    train_rows = np.vstack(
        [seg for name in labels for seg in assignments[name]["train"]]
    )
    standardizer = Standardizer.fit(train_rows)

    def _examples(which: str) -> list:
        return [
            (standardizer.transform(seg), label_to_idx[name])
            for name in labels
            for seg in assignments[name][which]
        ]

    manifest = {
        "format": FEATURES_FORMAT,
        "created": None,
        "labels": list(labels),
        "feature_names": list(FEATURE_NAMES),
        "channel_map": {k: list(v) for k, v in CHANNEL_MAP.items()},
        "window": {"length": window.length, "stride": window.stride},
        "ma": asdict(ma),
        "split": asdict(split),
        "period_hint_hz": period_hint_hz,
        "recordings": recording_entries,
        "split_counts": split_table,
    }
    return DatasetSplits(
        train=_examples("train"),
        val=_examples("val"),
        test=_examples("test"),
        labels=labels,
        standardizer=standardizer,
        manifest=manifest,
    )
