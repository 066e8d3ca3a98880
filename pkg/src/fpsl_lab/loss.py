"""Weak-label BCE plus alpha-weighted, mask-restricted BCE on pseudo strong labels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import InvalidInput, PseudoLabelSet

CLAMP = 1e-7


@dataclass(frozen=True)
class LossBreakdown:
    weak_loss: float
    fpsl_loss: float
    alpha: float
    total: float


def bce(pred, target):
    """Elementwise binary cross-entropy with probabilities clamped to [1e-7, 1 - 1e-7]."""
    p = np.clip(np.asarray(pred, dtype=np.float64), CLAMP, 1.0 - CLAMP)
    y = np.asarray(target, dtype=np.float64)
    return -(y * np.log(p) + (1.0 - y) * np.log1p(-p))


def bce_grad(pred, target):
    pred = np.asarray(pred, dtype=np.float64)
    p = np.clip(pred, CLAMP, 1.0 - CLAMP)
    inside = (pred >= CLAMP) & (pred <= 1.0 - CLAMP)
    return np.where(inside, (p - target) / (p * (1.0 - p)), 0.0)


def weak_loss(clip_probs, weak) -> float:
    clip_probs = np.asarray(clip_probs, dtype=np.float64)
    weak = np.asarray(weak)
    if clip_probs.shape != weak.shape:
        raise InvalidInput(f"clip probabilities {clip_probs.shape} vs weak labels {weak.shape}")
    return float(np.mean(bce(clip_probs, weak)))


def fpsl_loss(frame_probs, pseudo: PseudoLabelSet) -> float:
    """Mean BCE over the (class, frame) cells whose frame is selected by the mask; 0 if none."""
    frame_probs = np.asarray(frame_probs, dtype=np.float64)
    if frame_probs.shape != pseudo.labels.shape:
        raise InvalidInput(f"frame probabilities {frame_probs.shape} vs labels {pseudo.labels.shape}")
    active = np.broadcast_to(pseudo.mask.astype(bool), frame_probs.shape)
    count = int(active.sum())
    if count == 0:
        return 0.0
    return float(bce(frame_probs[active], pseudo.labels[active]).sum() / count)


def combined_loss(clip_probs, weak, frame_probs, pseudo: PseudoLabelSet, alpha: float) -> LossBreakdown:
    lw = weak_loss(clip_probs, weak)
    lf = fpsl_loss(frame_probs, pseudo)
    return LossBreakdown(weak_loss=lw, fpsl_loss=lf, alpha=float(alpha), total=lw + alpha * lf)


# Batched forms used by the training graph. Shapes: clip (B, C), frame (B, C, T), mask (B, T).

def batch_weak_loss(clip_probs, weak):
    """Returns (loss, d loss / d clip_probs), averaged over clips then classes."""
    b, c = clip_probs.shape
    value = bce(clip_probs, weak).mean()
    grad = bce_grad(clip_probs, weak) / (b * c)
    return float(value), grad


def batch_fpsl_loss(frame_probs, labels, mask):
    """Returns (loss, d loss / d frame_probs); per-clip masked mean, then mean over clips."""
    b, c, _ = frame_probs.shape
    cell_mask = np.broadcast_to(mask[:, None, :], frame_probs.shape)
    counts = c * mask.sum(axis=1)
    denom = np.where(counts > 0, counts, 1.0)
    per_clip = (bce(frame_probs, labels) * cell_mask).sum(axis=(1, 2)) / denom
    value = per_clip.mean()
    grad = bce_grad(frame_probs, labels) * cell_mask / (b * denom[:, None, None])
    return float(value), grad
