"""A small reverse-mode differentiation engine over float64 numpy arrays.

Each op computes its forward value eagerly and records a closure mapping the
output gradient to one gradient per parent. ``Tensor.backward`` walks the
graph in reverse topological order. Layout for sequence data is channels-last:
(batch, time, channels).
"""

from __future__ import annotations

import numpy as np

from .. import loss as _loss
from .. import pooling as _pool


class Tensor:
    __slots__ = ("data", "grad", "parents", "vjp", "name")

    def __init__(self, data, parents=(), vjp=None, name=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.parents = parents
        self.vjp = vjp
        self.name = name

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        label = f" {self.name}" if self.name else ""
        return f"Tensor{label}(shape={self.data.shape})"

    def zero_grad(self):
        self.grad = None

    def backward(self, grad=None):
        order: list[Tensor] = []
        seen: set[int] = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node.parents:
                if id(p) not in seen:
                    stack.append((p, False))
        self.grad = np.ones_like(self.data) if grad is None else np.asarray(grad, dtype=np.float64)
        for node in reversed(order):
            if node.vjp is None or node.grad is None:
                continue
            for parent, g in zip(node.parents, node.vjp(node.grad)):
                if g is None:
                    continue
                parent.grad = g if parent.grad is None else parent.grad + g


def constant(x) -> Tensor:
    return Tensor(x)


def add(a: Tensor, b: Tensor) -> Tensor:
    return Tensor(a.data + b.data, (a, b), lambda g: (g, g))


def scale(a: Tensor, k: float) -> Tensor:
    return Tensor(a.data * k, (a,), lambda g: (g * k,))


def tanh(a: Tensor) -> Tensor:
    y = np.tanh(a.data)
    return Tensor(y, (a,), lambda g: (g * (1.0 - y * y),))


def sigmoid(a: Tensor) -> Tensor:
    y = 0.5 * (1.0 + np.tanh(0.5 * a.data))
    return Tensor(y, (a,), lambda g: (g * y * (1.0 - y),))


def transpose_last(a: Tensor) -> Tensor:
    """Swap the last two axes."""
    return Tensor(np.swapaxes(a.data, -1, -2), (a,), lambda g: (np.swapaxes(g, -1, -2),))


def concat_last(*xs: Tensor) -> Tensor:
    sizes = np.cumsum([x.shape[-1] for x in xs])[:-1]
    return Tensor(np.concatenate([x.data for x in xs], axis=-1), xs,
                  lambda g: tuple(np.split(g, sizes, axis=-1)))


def linear(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """x (..., I) @ w (I, O) + b (O)."""
    def vjp(g):
        flat_x = x.data.reshape(-1, x.shape[-1])
        flat_g = g.reshape(-1, g.shape[-1])
        return g @ w.data.T, flat_x.T @ flat_g, flat_g.sum(axis=0)
    return Tensor(x.data @ w.data + b.data, (x, w, b), vjp)


def conv1d(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """'Same' temporal convolution with zero padding.

    x is (B, T, Cin); w is (K, Cin, Cout), tap j reading frame t + j - K // 2.
    """
    bsz, steps, cin = x.shape
    k = w.shape[0]
    pad = k // 2
    xp = np.pad(x.data, ((0, 0), (pad, k - 1 - pad), (0, 0)))
    out = b.data + xp[:, 0:steps] @ w.data[0]
    for j in range(1, k):
        out += xp[:, j:j + steps] @ w.data[j]

    def vjp(g):
        flat_g = g.reshape(-1, g.shape[-1])
        dxp = np.zeros_like(xp)
        dw = np.empty_like(w.data)
        for j in range(k):
            dxp[:, j:j + steps] += g @ w.data[j].T
            dw[j] = xp[:, j:j + steps].reshape(-1, cin).T @ flat_g
        return dxp[:, pad:pad + steps], dw, flat_g.sum(axis=0)

    return Tensor(out, (x, w, b), vjp)


def _smooth(h: np.ndarray, a: np.ndarray) -> np.ndarray:
    out = np.empty_like(h)
    state = np.zeros_like(h[:, 0])
    keep = 1.0 - a
    for t in range(h.shape[1]):
        state = a * state + keep * h[:, t]
        out[:, t] = state
    return out


def _smooth_adjoint(g: np.ndarray, a: np.ndarray) -> np.ndarray:
    lam = np.empty_like(g)
    state = np.zeros_like(g[:, 0])
    for t in range(g.shape[1] - 1, -1, -1):
        state = g[:, t] + a * state
        lam[:, t] = state
    return lam


def exp_smooth(x: Tensor, theta: Tensor, reverse: bool = False) -> Tensor:
    """First-order recursive smoothing along time with per-channel decay sigmoid(theta).

    s[t] = a * s[t-1] + (1 - a) * x[t], run backwards in time if ``reverse``.
    """
    a = 0.5 * (1.0 + np.tanh(0.5 * theta.data))
    h = x.data[:, ::-1] if reverse else x.data
    s = _smooth(h, a)

    def vjp(g):
        gs = g[:, ::-1] if reverse else g
        lam = _smooth_adjoint(gs, a)
        prev = np.concatenate([np.zeros_like(s[:, :1]), s[:, :-1]], axis=1)
        da = np.sum(lam * (prev - h), axis=(0, 1))
        dx = (1.0 - a) * lam
        if reverse:
            dx = dx[:, ::-1]
        return dx, da * a * (1.0 - a)

    out = s[:, ::-1] if reverse else s
    return Tensor(np.ascontiguousarray(out), (x, theta), vjp)


def pool(frames: Tensor, method: str, attn_logits: Tensor | None = None) -> Tensor:
    """Temporal pooling over the last axis of (B, C, T) posteriors."""
    if method == "attention":
        y = _pool.pool_attention(frames.data, attn_logits.data)
        return Tensor(y, (frames, attn_logits),
                      lambda g: _pool.pool_attention_vjp(frames.data, attn_logits.data, g))
    fwd, back = _pool.POOLERS[method]
    return Tensor(fwd(frames.data), (frames,), lambda g: (back(frames.data, g),))


def weak_bce(clip_probs: Tensor, weak: np.ndarray) -> Tensor:
    value, grad = _loss.batch_weak_loss(clip_probs.data, weak)
    return Tensor(value, (clip_probs,), lambda g: (g * grad,))


def masked_bce(frame_probs: Tensor, labels: np.ndarray, mask: np.ndarray) -> Tensor:
    """Pseudo-label BCE; labels and mask are constants of the graph."""
    value, grad = _loss.batch_fpsl_loss(frame_probs.data, labels, mask)
    return Tensor(value, (frame_probs,), lambda g: (g * grad,))
