"""Adam and the exponential-moving-average teacher."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import InvalidInput


def adam_step(param: np.ndarray, grad: np.ndarray, m: np.ndarray, v: np.ndarray, t: int,
              lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
    """One bias-corrected Adam update. Returns ``(param, m, v)`` as new arrays."""
    if t < 1:
        raise InvalidInput(f"Adam step counter must start at 1, got {t}")
    m = beta1 * m + (1.0 - beta1) * grad
    v = beta2 * v + (1.0 - beta2) * grad * grad
    m_hat = m / (1.0 - beta1 ** t)
    v_hat = v / (1.0 - beta2 ** t)
    return param - lr * m_hat / (np.sqrt(v_hat) + eps), m, v


@dataclass
class Adam:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)

    def step(self, params: dict, grads: dict) -> dict:
        self.t += 1
        updated = {}
        for name, value in params.items():
            g = grads[name]
            m = self.m.get(name, np.zeros_like(value))
            v = self.v.get(name, np.zeros_like(value))
            updated[name], self.m[name], self.v[name] = adam_step(
                value, g, m, v, self.t, self.lr, self.beta1, self.beta2, self.eps)
        return updated


@dataclass
class TeacherState:
    params: dict
    momentum: float


def ema_update(teacher: TeacherState, student: dict) -> TeacherState:
    """theta_teacher <- m * theta_teacher + (1 - m) * theta_student, elementwise."""
    m = teacher.momentum
    if set(teacher.params) != set(student):
        raise InvalidInput("teacher and student parameter sets differ")
    params = {}
    for name, value in teacher.params.items():
        if value.shape != student[name].shape:
            raise InvalidInput(f"shape mismatch for {name}")
        params[name] = m * value + (1.0 - m) * student[name]
    return TeacherState(params=params, momentum=m)
