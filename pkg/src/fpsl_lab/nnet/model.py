"""Reduced CRNN stand-in: temporal convolutions, bidirectional recursive smoothing,
a per-frame sigmoid classifier and a per-frame attention head."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import InvalidInput
from . import engine as E

Params = dict[str, np.ndarray]


def init_params(num_features: int, num_classes: int, hidden: int = 32, kernel: int = 5,
                rng: np.random.Generator | None = None) -> Params:
    """Glorot-uniform weights, zero biases, smoothing decays starting at sigmoid(2) ~ 0.88."""
    rng = rng if rng is not None else np.random.default_rng(0)

    def glorot(fan_in, fan_out, taps=None):
        a = np.sqrt(6.0 / (fan_in + fan_out))
        if taps is None:
            return rng.uniform(-a, a, size=(fan_in, fan_out))
        return rng.uniform(-a, a, size=(taps, fan_in // taps, fan_out))

    return {
        "conv1.w": glorot(num_features * kernel, hidden, kernel),
        "conv1.b": np.zeros(hidden),
        "conv2.w": glorot(hidden * kernel, hidden, kernel),
        "conv2.b": np.zeros(hidden),
        "smooth.fwd": np.full(hidden, 2.0),
        "smooth.bwd": np.full(hidden, 2.0),
        "mix.w": glorot(3 * hidden, hidden),
        "mix.b": np.zeros(hidden),
        "cls.w": glorot(hidden, num_classes),
        "cls.b": np.zeros(num_classes),
        "attn.w": glorot(hidden, num_classes),
        "attn.b": np.zeros(num_classes),
    }


@dataclass
class Forward:
    frames: E.Tensor  # (B, C, T) posteriors
    attn_logits: E.Tensor  # (B, C, T)
    clip: E.Tensor  # (B, C)
    leaves: dict[str, E.Tensor]


def forward(params: Params, features: np.ndarray, pooling: str = "attention") -> Forward:
    """Run the model on a batch of (B, F, T) features, or a single (F, T) clip."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim == 2:
        x = x[None]
    num_features = params["conv1.w"].shape[1]
    if x.ndim != 3 or x.shape[1] != num_features:
        raise InvalidInput(f"expected (B, {num_features}, T) features, got {x.shape}")
    leaves = {name: E.Tensor(value, name=name) for name, value in params.items()}
    p = leaves

    h = E.constant(np.ascontiguousarray(np.swapaxes(x, 1, 2)))
    h = E.tanh(E.conv1d(h, p["conv1.w"], p["conv1.b"]))
    h = E.tanh(E.conv1d(h, p["conv2.w"], p["conv2.b"]))
    sf = E.exp_smooth(h, p["smooth.fwd"])
    sb = E.exp_smooth(h, p["smooth.bwd"], reverse=True)
    z = E.tanh(E.linear(E.concat_last(h, sf, sb), p["mix.w"], p["mix.b"]))
    frames = E.transpose_last(E.sigmoid(E.linear(z, p["cls.w"], p["cls.b"])))
    logits = E.transpose_last(E.linear(z, p["attn.w"], p["attn.b"]))
    clip = E.pool(frames, pooling, logits)
    return Forward(frames=frames, attn_logits=logits, clip=clip, leaves=leaves)


def predict(params: Params, features: np.ndarray, batch_size: int = 64) -> np.ndarray:
    """Frame posteriors (B, C, T) without keeping gradients around."""
    x = np.asarray(features, dtype=np.float64)
    out = [forward(params, x[i:i + batch_size]).frames.data for i in range(0, len(x), batch_size)]
    return np.concatenate(out, axis=0)
