"""Shared domain types, validation and JSON Lines I/O."""

from __future__ import annotations

import json
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

POOLING_CHOICES = ("max", "mean", "linear_softmax", "attention")


class InvalidInput(ValueError):
    """Raised when an operation receives malformed or inconsistent arrays."""


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def frame_grid(values) -> np.ndarray:
    """Validate a C x T matrix of probabilities and return a read-only float64 copy."""
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidInput(f"frame grid must be a non-empty C x T matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0:
        raise InvalidInput("frame grid values must lie in [0, 1]")
    return _readonly(arr)


def _binary_vector(values, what: str) -> np.ndarray:
    arr = np.array(values)
    if arr.ndim != 1 or arr.size < 1:
        raise InvalidInput(f"{what} must be a non-empty vector, got shape {arr.shape}")
    if not np.all((arr == 0) | (arr == 1)):
        raise InvalidInput(f"{what} entries must be exactly 0 or 1")
    return _readonly(arr.astype(np.int8))


def weak_labels(values) -> np.ndarray:
    """Validate a length-C clip tag vector."""
    return _binary_vector(values, "weak labels")


def backprop_mask(values) -> np.ndarray:
    """Validate a length-T per-frame mask."""
    return _binary_vector(values, "backprop mask")


@dataclass(frozen=True)
class PseudoLabelSet:
    """Binary pseudo strong labels (C x T) and the per-frame backprop mask (T)."""

    labels: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        if self.labels.ndim != 2 or self.mask.ndim != 1:
            raise InvalidInput("labels must be C x T and mask must be length T")
        if self.labels.shape[1] != self.mask.shape[0]:
            raise InvalidInput("labels and mask disagree on T")

    def __eq__(self, other):
        if not isinstance(other, PseudoLabelSet):
            return NotImplemented
        return np.array_equal(self.labels, other.labels) and np.array_equal(self.mask, other.mask)


@dataclass(frozen=True, order=True)
class Event:
    """A labelled interval in seconds. Ordering is by (class, onset, offset)."""

    class_id: int
    onset_s: float
    offset_s: float

    def __post_init__(self):
        if not self.offset_s > self.onset_s:
            raise InvalidInput(f"empty event: offset {self.offset_s} <= onset {self.onset_s}")
        if self.onset_s < 0:
            raise InvalidInput(f"negative onset {self.onset_s}")

    @property
    def duration(self) -> float:
        return self.offset_s - self.onset_s

    def to_json(self) -> dict:
        return {"class": self.class_id, "onset_s": self.onset_s, "offset_s": self.offset_s}

    @classmethod
    def from_json(cls, obj: dict) -> "Event":
        return cls(int(obj["class"]), float(obj["onset_s"]), float(obj["offset_s"]))


@dataclass(frozen=True)
class ClipRecord:
    """One clip: features (F x T_in), weak tags and strong ground truth.

    Construction does not validate cross-field consistency; use
    :func:`validate_clip` for that, so malformed records read from disk can
    still be reported on.
    """

    clip_id: str
    features: np.ndarray
    weak: np.ndarray
    events: tuple[Event, ...]
    duration_s: float
    frame_rate_hz: float = 25.0

    @property
    def num_classes(self) -> int:
        return int(self.weak.shape[0])

    def to_json(self) -> dict:
        return {
            "clip_id": self.clip_id,
            "duration_s": self.duration_s,
            "frame_rate_hz": self.frame_rate_hz,
            "features": self.features.tolist(),
            "weak": [int(v) for v in self.weak],
            "events": [e.to_json() for e in self.events],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ClipRecord":
        return cls(
            clip_id=str(obj["clip_id"]),
            features=_readonly(np.array(obj["features"], dtype=np.float64)),
            weak=_readonly(np.array(obj["weak"], dtype=np.int8)),
            events=tuple(_lenient_event(e) for e in obj["events"]),
            duration_s=float(obj["duration_s"]),
            frame_rate_hz=float(obj.get("frame_rate_hz", 25.0)),
        )

    def __eq__(self, other):
        if not isinstance(other, ClipRecord):
            return NotImplemented
        return (
            self.clip_id == other.clip_id
            and self.events == other.events
            and self.duration_s == other.duration_s
            and self.frame_rate_hz == other.frame_rate_hz
            and np.array_equal(self.weak, other.weak)
            and self.features.shape == other.features.shape
            and np.array_equal(self.features, other.features)
        )


def _lenient_event(obj: dict) -> Event:
    # Bypass __post_init__ so that validate_clip can report broken events.
    ev = object.__new__(Event)
    object.__setattr__(ev, "onset_s", float(obj["onset_s"]))
    object.__setattr__(ev, "offset_s", float(obj["offset_s"]))
    object.__setattr__(ev, "class_id", int(obj["class"]))
    return ev


def validate_clip(record: ClipRecord) -> list[str]:
    """Return every invariant violation of ``record``; an empty list means ok."""
    problems: list[str] = []
    feats = np.asarray(record.features)
    if feats.ndim != 2 or feats.size == 0:
        problems.append(f"malformed features: shape {feats.shape}")
    elif not np.all(np.isfinite(feats)):
        problems.append("malformed features: non-finite values")
    weak = np.asarray(record.weak)
    if weak.ndim != 1 or weak.size == 0:
        problems.append(f"malformed weak labels: shape {weak.shape}")
        return problems
    if not np.all((weak == 0) | (weak == 1)):
        problems.append("malformed weak labels: entries must be 0 or 1")
    if not record.duration_s > 0:
        problems.append(f"non-positive duration {record.duration_s}")
    num_classes = weak.size
    present = set()
    for ev in record.events:
        if not 0 <= ev.class_id < num_classes:
            problems.append(f"class id {ev.class_id} out of range")
            continue
        present.add(ev.class_id)
        if not ev.offset_s > ev.onset_s:
            problems.append(f"empty event class {ev.class_id} at {ev.onset_s}")
        if ev.onset_s < 0 or ev.offset_s > record.duration_s:
            problems.append(f"event out of range class {ev.class_id} ({ev.onset_s}, {ev.offset_s})")
    for c in range(num_classes):
        if (weak[c] == 1) != (c in present):
            problems.append(f"weak/strong mismatch class {c}")
    return problems


@dataclass(frozen=True)
class ExperimentConfig:
    """Every knob of a training + evaluation run."""

    # pseudo strong labels and loss
    thresh: float = 0.6
    win_size: int = 1
    alpha: float = 0.3
    use_fpsl: bool = True
    # decoding
    median_size: int = 7
    binarize_thresh: float = 0.5
    frame_rate_hz: float = 25.0
    # model / optimiser
    pooling: str = "attention"
    hidden: int = 32
    kernel: int = 5
    epochs: int = 60
    batch_size: int = 16
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    ema_momentum: float = 0.999
    seed: int = 1
    # metrics
    onset_collar_s: float = 0.2
    offset_collar_s: float = 0.2
    offset_collar_frac: float = 0.2
    ib_dtc: float = 0.5
    ib_gtc: float = 0.5
    e_max: float = 100.0
    num_operating_points: int = 50

    def __post_init__(self):
        problems = []
        for name in ("thresh", "binarize_thresh", "ib_dtc", "ib_gtc"):
            v = getattr(self, name)
            if not 0 < v < 1 and not (name.startswith("ib_") and v == 1):
                problems.append(f"{name}={v} outside (0, 1)")
        if self.win_size < 0:
            problems.append(f"win_size={self.win_size} < 0")
        if self.alpha < 0:
            problems.append(f"alpha={self.alpha} < 0")
        if self.median_size < 1 or self.median_size % 2 == 0:
            problems.append(f"median_size={self.median_size} must be odd and positive")
        if self.pooling not in POOLING_CHOICES:
            problems.append(f"unknown pooling {self.pooling!r}")
        if not 0 <= self.ema_momentum < 1:
            problems.append(f"ema_momentum={self.ema_momentum} outside [0, 1)")
        if self.epochs < 1 or self.batch_size < 1 or self.learning_rate <= 0:
            problems.append("epochs, batch_size and learning_rate must be positive")
        if self.frame_rate_hz <= 0 or self.e_max <= 0 or self.num_operating_points < 1:
            problems.append("frame_rate_hz, e_max and num_operating_points must be positive")
        if problems:
            raise InvalidInput("; ".join(problems))

    def with_(self, **changes) -> "ExperimentConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise InvalidInput(f"unknown config keys: {sorted(unknown)}")
        return cls(**obj)


def write_jsonl(path: str | Path, records: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, separators=(",", ":")))
            fh.write("\n")


def read_jsonl(path: str | Path) -> Iterator[dict]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as exc:
                raise InvalidInput(f"{path}:{lineno}: {exc}") from exc


def save_dataset(path: str | Path, clips: Sequence[ClipRecord]) -> None:
    write_jsonl(path, (c.to_json() for c in clips))


def load_dataset(path: str | Path, validate: bool = True) -> list[ClipRecord]:
    clips = [ClipRecord.from_json(obj) for obj in read_jsonl(path)]
    if validate:
        for clip in clips:
            problems = validate_clip(clip)
            if problems:
                raise InvalidInput(f"{path}: clip {clip.clip_id}: {'; '.join(problems)}")
    return clips


def save_predictions(path: str | Path, predictions: dict[str, list[Event]],
                     posteriors: dict[str, np.ndarray] | None = None) -> None:
    """Write decoded events (and optionally raw frame grids) as JSON Lines."""
    rows: list[dict] = [
        {"clip_id": cid, "events": [e.to_json() for e in sorted(evs)]}
        for cid, evs in predictions.items()
    ]
    if posteriors:
        rows += [{"clip_id": cid, "posteriors": np.asarray(g).tolist()} for cid, g in posteriors.items()]
    write_jsonl(path, rows)


def load_predictions(path: str | Path) -> tuple[dict[str, list[Event]], dict[str, np.ndarray]]:
    events: dict[str, list[Event]] = {}
    grids: dict[str, np.ndarray] = {}
    for obj in read_jsonl(path):
        cid = str(obj["clip_id"])
        if "events" in obj:
            events[cid] = [Event.from_json(e) for e in obj["events"]]
        if "posteriors" in obj:
            grids[cid] = frame_grid(obj["posteriors"])
    return events, grids
