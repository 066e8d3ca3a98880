"""Student/teacher training loop with per-step pseudo strong labels."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..core import ClipRecord, ExperimentConfig, InvalidInput
from ..fpsl import FpslParams, build_fpsl_batch
from ..loss import LossBreakdown
from . import engine as E
from .model import Params, forward, init_params
from .optim import Adam, TeacherState, ema_update

log = logging.getLogger(__name__)


class TrainingAborted(RuntimeError):
    pass


@dataclass
class TrainResult:
    student: Params
    teacher: TeacherState
    log: list[dict] = field(default_factory=list)


def stack_clips(clips: Sequence[ClipRecord]) -> tuple[np.ndarray, np.ndarray]:
    """(N, F, T) features and (N, C) weak labels; all clips must share a shape."""
    if not clips:
        raise InvalidInput("empty dataset")
    shapes = {c.features.shape for c in clips}
    if len(shapes) != 1:
        raise InvalidInput(f"clips have differing feature shapes: {sorted(shapes)}")
    x = np.stack([c.features for c in clips]).astype(np.float64)
    w = np.stack([c.weak for c in clips]).astype(np.float64)
    return x, w


def loss_graph(params: Params, x: np.ndarray, weak: np.ndarray, config: ExperimentConfig,
               with_fpsl: bool = True, pseudo: tuple[np.ndarray, np.ndarray] | None = None):
    """Build the training objective for one batch.

    Pseudo labels come from the current frame posteriors unless ``pseudo``
    (labels, mask) is supplied, which lets gradient checks hold them fixed.
    With ``with_fpsl=False`` the pseudo-label term is left out of the graph
    entirely; its value is still measured for logging.

    Returns ``(total, breakdown, leaves)``.
    """
    out = forward(params, x, config.pooling)
    if pseudo is None:
        pseudo = build_fpsl_batch(out.frames.data, weak,
                                  FpslParams(config.thresh, config.win_size))
    labels, mask = pseudo
    weak_term = E.weak_bce(out.clip, weak)
    fpsl_term = E.masked_bce(out.frames, labels, mask)
    if with_fpsl:
        total = E.add(weak_term, E.scale(fpsl_term, config.alpha))
        alpha = config.alpha
    else:
        total = weak_term
        alpha = 0.0
    breakdown = LossBreakdown(weak_loss=float(weak_term.data), fpsl_loss=float(fpsl_term.data),
                              alpha=alpha, total=float(total.data))
    return total, breakdown, out.leaves


def gradients(params: Params, x, weak, config: ExperimentConfig, with_fpsl: bool = True,
              pseudo=None) -> tuple[LossBreakdown, dict[str, np.ndarray]]:
    total, breakdown, leaves = loss_graph(params, x, weak, config, with_fpsl, pseudo)
    total.backward()
    grads = {name: (t.grad if t.grad is not None else np.zeros_like(t.data))
             for name, t in leaves.items()}
    return breakdown, grads


def train(clips: Sequence[ClipRecord], config: ExperimentConfig) -> TrainResult:
    """Train a student with Adam, tracking an EMA teacher that is used for evaluation."""
    x, w = stack_clips(clips)
    init_seq, order_seq = np.random.SeedSequence(config.seed).spawn(2)
    params = init_params(x.shape[1], w.shape[1], config.hidden, config.kernel,
                         np.random.default_rng(init_seq))
    order_rng = np.random.default_rng(order_seq)
    teacher = TeacherState({k: v.copy() for k, v in params.items()}, config.ema_momentum)
    opt = Adam(config.learning_rate, config.beta1, config.beta2, config.eps)
    history = []
    n = len(x)
    for epoch in range(config.epochs):
        perm = order_rng.permutation(n)
        sums = np.zeros(3)
        for b, start in enumerate(range(0, n, config.batch_size)):
            idx = perm[start:start + config.batch_size]
            breakdown, grads = gradients(params, x[idx], w[idx], config, config.use_fpsl)
            if not np.isfinite(breakdown.total):
                raise TrainingAborted(
                    f"non-finite loss (seed={config.seed}, epoch={epoch}, batch={b})")
            params = opt.step(params, grads)
            teacher = ema_update(teacher, params)
            k = len(idx)
            sums += k * np.array([breakdown.weak_loss, breakdown.fpsl_loss, breakdown.total])
        record = {"epoch": epoch, "weak_loss": float(sums[0] / n), "fpsl_loss": float(sums[1] / n),
                  "total_loss": float(sums[2] / n)}
        history.append(record)
        log.debug("seed %d epoch %d %s", config.seed, epoch, record)
    return TrainResult(student=params, teacher=teacher, log=history)
