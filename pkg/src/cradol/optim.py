"""Adam updates, global-norm gradient clipping, and soft target updates."""

from __future__ import annotations

import numpy as np


class Adam:
    """Standard Adam with bias correction over a fixed list of parameters.

    step() consumes and clears the gradients; a parameter with no gradient
    is an error (a zero gradient is fine, a missing one means the caller
    never ran backward for this group).
    """

    def __init__(self, params, lr=3e-4, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def step(self):
        for p in self.params:
            if p.grad is None:
                raise ValueError(f"Adam.step: parameter {p.name or p.shape} has no gradient")
        self.step_count += 1
        t = self.step_count
        b1, b2 = self.beta1, self.beta2
        bc1 = 1.0 - b1**t
        bc2 = 1.0 - b2**t
        for p, m, v in zip(self.params, self.m, self.v):
            g = p.grad
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * (g * g)
            p.data -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)
            p.grad = None


def grad_global_norm(params):
    total = 0.0
    for p in params:
        if p.grad is not None:
            total += float((p.grad * p.grad).sum())
    return np.sqrt(total)


def clip_grad_norm(params, max_norm):
    """Scale the group's gradients so their global L2 norm is <= max_norm."""
    norm = grad_global_norm(params)
    if norm > max_norm and norm > 0.0:
        scale = max_norm / norm
        for p in params:
            if p.grad is not None:
                p.grad *= scale
    return norm


def soft_update(target_params, online_params, tau):
    """target <- tau * online + (1 - tau) * target, elementwise."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"soft_update: tau must be in [0, 1], got {tau}")
    if len(target_params) != len(online_params):
        raise ValueError("soft_update: parameter lists differ in length")
    if tau == 0.0:
        return
    for tp, op in zip(target_params, online_params):
        if tp.data.shape != op.data.shape:
            raise ValueError(
                f"soft_update: shape mismatch {tp.data.shape} vs {op.data.shape}"
            )
        if tau == 1.0:
            np.copyto(tp.data, op.data)
        else:
            tp.data *= 1.0 - tau
            tp.data += tau * op.data
