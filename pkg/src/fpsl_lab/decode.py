"""Frame posteriors -> events: thresholding, binary median filtering, run extraction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Event, InvalidInput


@dataclass(frozen=True)
class DecodeParams:
    binarize_thresh: float = 0.5
    median_size: int = 7
    frame_rate_hz: float = 25.0

    def __post_init__(self):
        if self.median_size < 1 or self.median_size % 2 == 0:
            raise InvalidInput(f"median_size={self.median_size} must be odd and positive")
        if self.frame_rate_hz <= 0:
            raise InvalidInput("frame_rate_hz must be positive")


def binarize(grid, thresh: float) -> np.ndarray:
    return (np.asarray(grid) >= thresh).astype(np.int8)


def median_filter(rows, size: int) -> np.ndarray:
    """Median of a zero-padded, centred window of ``size`` frames along the last axis."""
    if size < 1 or size % 2 == 0:
        raise InvalidInput(f"median filter size must be odd and positive, got {size}")
    rows = np.asarray(rows, dtype=np.int8)
    if size == 1:
        return rows.copy()
    half = size // 2
    pad = [(0, 0)] * (rows.ndim - 1) + [(half + 1, half)]
    csum = np.cumsum(np.pad(rows, pad).astype(np.int32), axis=-1)
    window = csum[..., size:] - csum[..., :-size]
    return (window > half).astype(np.int8)


def segments_to_events(row, class_id: int, frame_rate_hz: float) -> list[Event]:
    """Each maximal run of ones over frames i..j becomes [i / fr, (j + 1) / fr)."""
    if frame_rate_hz <= 0:
        raise InvalidInput("frame_rate_hz must be positive")
    onsets, offsets = _runs(np.asarray(row, dtype=np.int8))
    return [Event(int(class_id), i / frame_rate_hz, j / frame_rate_hz) for i, j in zip(onsets, offsets)]


def _runs(row: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # start index and exclusive end index of every run of ones
    edges = np.diff(np.concatenate(([0], row, [0])).astype(np.int8))
    return np.flatnonzero(edges == 1), np.flatnonzero(edges == -1)


def decode(grid, params: DecodeParams) -> list[Event]:
    """Events of one clip from its C x T posteriors, sorted by (class, onset)."""
    binary = median_filter(binarize(grid, params.binarize_thresh), params.median_size)
    events: list[Event] = []
    for c, row in enumerate(binary):
        events.extend(segments_to_events(row, c, params.frame_rate_hz))
    return events


def decode_batch(grids: np.ndarray, thresholds, median_size: int, frame_rate_hz: float):
    """Decode (N, C, T) posteriors at several thresholds.

    Returns one list per threshold, each holding per-clip event lists.
    """
    grids = np.asarray(grids)
    result = []
    for th in thresholds:
        binary = median_filter(binarize(grids, th), median_size)
        per_clip = []
        for clip in binary:
            events = []
            for c, row in enumerate(clip):
                if row.any():
                    on, off = _runs(row)
                    events.extend(Event(c, i / frame_rate_hz, j / frame_rate_hz) for i, j in zip(on, off))
            per_clip.append(events)
        result.append(per_clip)
    return result
