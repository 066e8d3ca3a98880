"""Seeded synthetic polyphonic scenes with short transient and long stationary classes."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .core import ClipRecord, Event, InvalidInput

SPLITS = ("train", "eval")


@dataclass(frozen=True)
class ClassProfile:
    class_id: int
    name: str
    template: tuple[float, ...]
    min_s: float
    max_s: float
    stationarity: str = "stationary"  # or "transient"
    presence_prob: float = 0.4
    max_events: int = 1

    def __post_init__(self):
        if self.stationarity not in ("stationary", "transient"):
            raise InvalidInput(f"unknown stationarity {self.stationarity!r}")
        if not (self.min_s > 0 and self.max_s >= self.min_s):
            raise InvalidInput(f"class {self.class_id}: bad duration range ({self.min_s}, {self.max_s})")
        if not 0 <= self.presence_prob <= 1 or self.max_events < 1:
            raise InvalidInput(f"class {self.class_id}: bad event-count distribution")

    @property
    def mean_duration(self) -> float:
        return 0.5 * (self.min_s + self.max_s)


@dataclass(frozen=True)
class SceneConfig:
    profiles: tuple[ClassProfile, ...]
    num_clips: int = 600
    num_eval_clips: int = 200
    clip_duration_s: float = 10.0
    frame_rate_hz: float = 25.0
    feature_bins: int = 16
    noise_std: float = 0.15
    gain: float = 0.8
    seed: int = 0

    def __post_init__(self):
        for p in self.profiles:
            if p.max_s > self.clip_duration_s:
                raise InvalidInput(f"class {p.class_id}: events up to {p.max_s}s do not fit "
                                   f"in {self.clip_duration_s}s clips")
            if len(p.template) != self.feature_bins:
                raise InvalidInput(f"class {p.class_id}: template has {len(p.template)} bins, "
                                   f"expected {self.feature_bins}")
        ids = [p.class_id for p in self.profiles]
        if ids != list(range(len(ids))):
            raise InvalidInput("profile class ids must be 0..C-1 in order")

    @property
    def num_classes(self) -> int:
        return len(self.profiles)

    @property
    def class_names(self) -> list[str]:
        return [p.name for p in self.profiles]

    @property
    def num_frames(self) -> int:
        return int(round(self.clip_duration_s * self.frame_rate_hz))

    def to_json(self) -> dict:
        d = asdict(self)
        d["profiles"] = [asdict(p) for p in self.profiles]
        return d

    @classmethod
    def from_json(cls, obj: dict) -> "SceneConfig":
        obj = dict(obj)
        profiles = tuple(ClassProfile(**{**p, "template": tuple(p["template"])}) for p in obj.pop("profiles"))
        return cls(profiles=profiles, **obj)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2))

    @classmethod
    def load(cls, path: str | Path) -> "SceneConfig":
        return cls.from_json(json.loads(Path(path).read_text()))


def _bump(bins: int, centre: float, width: float) -> np.ndarray:
    f = np.arange(bins)
    return np.exp(-0.5 * ((f - centre) / width) ** 2)


def desk_dcase(seed: int = 0, presence_prob: float = 0.12, **overrides) -> SceneConfig:
    """Six classes: three short transients (0.2-1.0 s) and three long stationary sounds (3-8 s).

    Each class is present in a clip with probability ``presence_prob``
    (transients then place one or two events, stationary classes one), so
    most clips hold zero to two classes and overlaps stay occasional.
    """
    bins = overrides.get("feature_bins", 16)
    specs = [
        ("cat", 2.0, "transient", 0.2, 1.0, 2),
        ("dishes", 7.0, "transient", 0.2, 1.0, 2),
        ("dog", 12.0, "transient", 0.2, 1.0, 2),
        ("blender", 4.5, "stationary", 3.0, 8.0, 1),
        ("vacuum_cleaner", 9.5, "stationary", 3.0, 8.0, 1),
        ("running_water", 14.0, "stationary", 3.0, 8.0, 1),
    ]
    profiles = []
    for cid, (name, centre, kind, lo, hi, max_events) in enumerate(specs):
        tpl = _bump(bins, centre * bins / 16, 1.5 * bins / 16)
        profiles.append(ClassProfile(cid, name, tuple(np.round(tpl, 6).tolist()), lo, hi, kind,
                                     presence_prob=presence_prob, max_events=max_events))
    return SceneConfig(profiles=tuple(profiles), seed=seed, **overrides)


def _envelope(kind: str, frames: int, rng: np.random.Generator) -> np.ndarray:
    if kind == "stationary":
        return np.ones(frames)
    # fast attack, random exponential decay, random flutter; strictly positive
    decay = rng.uniform(0.3, 1.2) / max(frames, 1)
    flutter = rng.uniform(0.5, 1.0, size=frames)
    return np.exp(-decay * np.arange(frames)) * flutter


def event_frames(event: Event, frame_rate_hz: float, num_frames: int) -> tuple[int, int]:
    """First frame and exclusive end frame touched by an event."""
    start = int(np.floor(event.onset_s * frame_rate_hz + 1e-9))
    stop = int(np.ceil(event.offset_s * frame_rate_hz - 1e-9))
    return max(0, start), min(num_frames, max(stop, start + 1))


def generate_clip(config: SceneConfig, split: str, index: int) -> ClipRecord:
    if split not in SPLITS:
        raise InvalidInput(f"unknown split {split!r}")
    rng = np.random.default_rng([config.seed, SPLITS.index(split), index])
    frames = config.num_frames
    signal = np.zeros((config.feature_bins, frames))
    events: list[Event] = []
    for p in config.profiles:
        count = rng.integers(1, p.max_events + 1) if rng.random() < p.presence_prob else 0
        template = np.asarray(p.template)
        for _ in range(count):
            dur = rng.uniform(p.min_s, p.max_s)
            onset = rng.uniform(0.0, config.clip_duration_s - dur)
            ev = Event(p.class_id, onset, onset + dur)
            events.append(ev)
            a, b = event_frames(ev, config.frame_rate_hz, frames)
            signal[:, a:b] += template[:, None] * _envelope(p.stationarity, b - a, rng)[None, :]
    noise = rng.normal(0.0, config.noise_std, size=signal.shape) if config.noise_std > 0 else 0.0
    features = np.clip(config.gain * (signal + noise), 0.0, 1.0)
    weak = np.zeros(config.num_classes, dtype=np.int8)
    for ev in events:
        weak[ev.class_id] = 1
    features.setflags(write=False)
    weak.setflags(write=False)
    return ClipRecord(clip_id=f"{split}_{index:05d}", features=features, weak=weak,
                      events=tuple(sorted(events)), duration_s=config.clip_duration_s,
                      frame_rate_hz=config.frame_rate_hz)


def generate(config: SceneConfig, split: str = "train", num_clips: int | None = None) -> list[ClipRecord]:
    """Clips of one split; each clip has its own RNG stream keyed by (seed, split, index)."""
    if num_clips is None:
        num_clips = config.num_clips if split == "train" else config.num_eval_clips
    return [generate_clip(config, split, i) for i in range(num_clips)]
