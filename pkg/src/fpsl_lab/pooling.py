"""Temporal pooling of frame posteriors into clip probabilities.

Every operator works on arrays shaped (..., C, T) and reduces the last axis.
Each forward function has a matching ``*_vjp`` that maps an upstream gradient
on the clip probabilities (..., C) back to the inputs.
"""

from __future__ import annotations

import numpy as np


def pool_max(grid) -> np.ndarray:
    return np.max(grid, axis=-1)


def pool_max_vjp(grid, g) -> np.ndarray:
    # earliest maximiser takes the whole gradient
    grid = np.asarray(grid)
    out = np.zeros_like(grid, dtype=np.float64)
    idx = np.argmax(grid, axis=-1)[..., None]
    np.put_along_axis(out, idx, np.asarray(g, dtype=np.float64)[..., None], axis=-1)
    return out


def pool_mean(grid) -> np.ndarray:
    return np.mean(grid, axis=-1)


def pool_mean_vjp(grid, g) -> np.ndarray:
    grid = np.asarray(grid)
    return np.broadcast_to(np.asarray(g)[..., None] / grid.shape[-1], grid.shape).astype(np.float64)


def pool_linear_softmax(grid) -> np.ndarray:
    """sum(p^2) / sum(p), defined as 0 for an all-zero row."""
    grid = np.asarray(grid, dtype=np.float64)
    s1 = grid.sum(axis=-1)
    s2 = (grid * grid).sum(axis=-1)
    safe = np.where(s1 > 0, s1, 1.0)
    return np.where(s1 > 0, s2 / safe, 0.0)


def pool_linear_softmax_vjp(grid, g) -> np.ndarray:
    grid = np.asarray(grid, dtype=np.float64)
    s1 = grid.sum(axis=-1, keepdims=True)
    s2 = (grid * grid).sum(axis=-1, keepdims=True)
    safe = np.where(s1 > 0, s1, 1.0)
    d = (2.0 * grid * safe - s2) / (safe * safe)
    return np.where(s1 > 0, d, 0.0) * np.asarray(g)[..., None]


def softmax(logits, axis: int = -1) -> np.ndarray:
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=axis, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)


def pool_attention(grid, attn_logits) -> np.ndarray:
    """Softmax-over-time weighted average of the posteriors."""
    grid = np.asarray(grid, dtype=np.float64)
    if np.shape(attn_logits) != grid.shape:
        raise ValueError(f"attention logits {np.shape(attn_logits)} do not match grid {grid.shape}")
    return np.sum(softmax(attn_logits) * grid, axis=-1)


def pool_attention_vjp(grid, attn_logits, g):
    """Returns (d/dgrid, d/dlogits)."""
    grid = np.asarray(grid, dtype=np.float64)
    a = softmax(attn_logits)
    y = np.sum(a * grid, axis=-1, keepdims=True)
    g = np.asarray(g)[..., None]
    return a * g, a * (grid - y) * g


POOLERS = {
    "max": (pool_max, pool_max_vjp),
    "mean": (pool_mean, pool_mean_vjp),
    "linear_softmax": (pool_linear_softmax, pool_linear_softmax_vjp),
}
