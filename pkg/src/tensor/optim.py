"""Adam with bias correction."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from ..errors import ConfigError, ShapeError
from .core import Tensor


@dataclass
class AdamState:
    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(
    params: Mapping[str, np.ndarray],
    grads: Mapping[str, Optional[np.ndarray]],
    state: AdamState,
    *,
    lr: float,
    betas: Tuple[float, float] = (0.9, 0.999),
    eps: float = 1e-8,
) -> AdamState:
    """Update ``params`` in place; a missing gradient counts as zero."""
    if lr <= 0:
        raise ConfigError(f"adam_step: lr must be > 0, got {lr}")
    beta1, beta2 = betas
    state.step += 1
    bc1 = 1.0 - beta1**state.step
    bc2 = 1.0 - beta2**state.step
    for name, value in params.items():
        grad = grads.get(name)
        if grad is None:
            grad = np.zeros_like(value)
        if grad.shape != value.shape:
            raise ShapeError("adam_step", value.shape, grad.shape, detail=name)
        m = state.m.setdefault(name, np.zeros_like(value))
        v = state.v.setdefault(name, np.zeros_like(value))
        if m.shape != value.shape:
            raise ShapeError("adam_step", value.shape, m.shape, detail=f"{name} state")
        m *= beta1
        m += (1.0 - beta1) * grad
        v *= beta2
        v += (1.0 - beta2) * (grad * grad)
        value -= (lr / bc1) * m / (np.sqrt(v / bc2) + eps)
    return state


class Adam:
    """Optimizer over named leaf tensors."""

    def __init__(
        self,
        params: Mapping[str, Tensor],
        *,
        lr: float = 1e-4,
        betas: Tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
    ) -> None:
        self.params = dict(params)
        self.lr = lr
        self.betas = betas
        self.eps = eps
        self.state = AdamState()

    def zero_grad(self) -> None:
        for tensor in self.params.values():
            tensor.grad = None

    def step(self) -> None:
        adam_step(
            {name: t.data for name, t in self.params.items()},
            {name: t.grad for name, t in self.params.items()},
            self.state,
            lr=self.lr,
            betas=self.betas,
            eps=self.eps,
        )

    def grad_norm(self) -> float:
        total = 0.0
        for tensor in self.params.values():
            if tensor.grad is not None:
                total += float(np.sum(tensor.grad * tensor.grad))
        return total**0.5
