"""Frame-level pseudo strong labels built from a model's own frame posteriors.

Per clip and per training step:

1. locate the peak frame of every class,
2. widen it by ``win_size`` frames on each side (clipped to the clip),
3. keep widened frames whose posterior clears ``thresh``,
4. zero the rows of classes absent from the weak tags,
5. select the frames that take part in the pseudo-label loss: the widened
   neighbourhoods of every class whose peak clears ``thresh``.

Labels and mask are targets/selectors; they never carry gradient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import InvalidInput, PseudoLabelSet, frame_grid, weak_labels


@dataclass(frozen=True)
class FpslParams:
    thresh: float = 0.6
    win_size: int = 1

    def __post_init__(self):
        if not 0 < self.thresh < 1:
            raise InvalidInput(f"thresh={self.thresh} outside (0, 1)")
        if self.win_size < 0 or int(self.win_size) != self.win_size:
            raise InvalidInput(f"win_size={self.win_size} must be a non-negative integer")


def locate_maxima(output) -> np.ndarray:
    """Peak frame per class; ties resolve to the earliest frame."""
    return np.argmax(np.asarray(output), axis=-1)


def extend_window(t_star: int, win_size: int, num_frames: int) -> set[int]:
    if not 0 <= t_star < num_frames:
        raise InvalidInput(f"t_star={t_star} outside [0, {num_frames})")
    return set(range(max(0, t_star - win_size), min(num_frames, t_star + win_size + 1)))


def window_matrix(t_star: np.ndarray, win_size: int, num_frames: int) -> np.ndarray:
    """Boolean (..., C, T) membership of each frame in its class's widened peak window."""
    t = np.arange(num_frames)
    return np.abs(t - t_star[..., None]) <= win_size


def build_fpsl_batch(output: np.ndarray, weak: np.ndarray, params: FpslParams):
    """Vectorised construction over a batch.

    ``output`` is (B, C, T) and ``weak`` is (B, C). Returns ``(labels, mask)``
    with shapes (B, C, T) and (B, T), both float64 with values in {0, 1}.
    """
    output = np.asarray(output)
    weak = np.asarray(weak)
    if output.ndim != 3 or weak.shape != output.shape[:2]:
        raise InvalidInput(f"shape mismatch: output {output.shape}, weak {weak.shape}")
    t_star = locate_maxima(output)
    in_window = window_matrix(t_star, params.win_size, output.shape[-1])
    peak = np.take_along_axis(output, t_star[..., None], axis=-1)[..., 0]
    labels = in_window & (output >= params.thresh) & (weak[..., None] == 1)
    confident = peak >= params.thresh
    mask = np.any(in_window & confident[..., None], axis=1)
    return labels.astype(np.float64), mask.astype(np.float64)


def build_fpsl(output, weak, params: FpslParams) -> PseudoLabelSet:
    """Pseudo strong labels and backprop mask for one clip (C x T posteriors)."""
    grid = frame_grid(output)
    tags = weak_labels(weak)
    if tags.shape[0] != grid.shape[0]:
        raise InvalidInput(f"weak labels have {tags.shape[0]} classes, output has {grid.shape[0]}")
    labels, mask = build_fpsl_batch(grid[None], tags[None], params)
    return PseudoLabelSet(labels=labels[0].astype(np.int8), mask=mask[0].astype(np.int8))


def fpsl_oracle(output, weak, params: FpslParams) -> PseudoLabelSet:
    """Deliberately naive reference for :func:`build_fpsl` using plain Python loops."""
    rows = [[float(v) for v in row] for row in np.asarray(output).tolist()]
    tags = [int(v) for v in np.asarray(weak).tolist()]
    if len(rows) != len(tags):
        raise InvalidInput("weak labels and output disagree on the number of classes")
    num_classes = len(rows)
    num_frames = len(rows[0])
    thresh, win = params.thresh, params.win_size

    peaks = []
    for c in range(num_classes):
        best = 0
        for t in range(1, num_frames):
            if rows[c][t] > rows[c][best]:
                best = t
        peaks.append(best)

    labels = [[0] * num_frames for _ in range(num_classes)]
    mask = [0] * num_frames
    for c in range(num_classes):
        for t in range(num_frames):
            near = peaks[c] - win <= t <= peaks[c] + win
            if near and rows[c][t] >= thresh:
                labels[c][t] = 1 * tags[c]
    for t in range(num_frames):
        for c in range(num_classes):
            near = peaks[c] - win <= t <= peaks[c] + win
            if near and rows[c][peaks[c]] >= thresh:
                mask[t] = 1
                break
    return PseudoLabelSet(labels=np.array(labels, dtype=np.int8), mask=np.array(mask, dtype=np.int8))
