"""Central finite differences as an independent oracle for the analytic gradients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import ExperimentConfig
from ..fpsl import FpslParams, build_fpsl_batch
from .model import Params, forward, init_params
from .train import gradients, loss_graph

# below this magnitude both gradients count as zero and are compared absolutely
GRAD_FLOOR = 1e-7


@dataclass(frozen=True)
class Probe:
    name: str
    index: tuple
    analytic: float
    numeric: float

    @property
    def rel_error(self) -> float:
        denom = max(abs(self.analytic), abs(self.numeric), GRAD_FLOOR)
        return abs(self.analytic - self.numeric) / denom


def random_problem(rng: np.random.Generator, num_classes: int = 3, num_frames: int = 8,
                   num_features: int = 5, batch: int = 2, hidden: int = 6, kernel: int = 3):
    """Small random model, batch and weak labels for gradient probing."""
    params = init_params(num_features, num_classes, hidden, kernel, rng)
    # move off the symmetric zero-bias start so every path carries signal
    params = {k: v + rng.normal(0, 0.3, v.shape) for k, v in params.items()}
    x = rng.random((batch, num_features, num_frames))
    weak = rng.integers(0, 2, size=(batch, num_classes)).astype(np.float64)
    return params, x, weak


def check_gradients(params: Params, x: np.ndarray, weak: np.ndarray, config: ExperimentConfig,
                    num_probes: int = 100, step: float = 1e-4,
                    rng: np.random.Generator | None = None) -> list[Probe]:
    """Compare analytic and central-difference derivatives of the combined loss.

    Pseudo labels and mask are computed once at ``params`` and then held fixed,
    as they are constants of the backward pass.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    frames = forward(params, x, config.pooling).frames.data
    pseudo = build_fpsl_batch(frames, weak, FpslParams(config.thresh, config.win_size))
    _, grads = gradients(params, x, weak, config, config.use_fpsl, pseudo)

    names = sorted(params)
    sizes = np.array([params[n].size for n in names])
    probes = []
    for _ in range(num_probes):
        name = names[rng.choice(len(names), p=sizes / sizes.sum())]
        index = tuple(int(rng.integers(0, d)) for d in params[name].shape)

        def loss_at(delta):
            shifted = dict(params)
            shifted[name] = params[name].copy()
            shifted[name][index] += delta
            total, _, _ = loss_graph(shifted, x, weak, config, config.use_fpsl, pseudo)
            return float(total.data)

        numeric = (loss_at(step) - loss_at(-step)) / (2 * step)
        probes.append(Probe(name, index, float(grads[name][index]), numeric))
    return probes
