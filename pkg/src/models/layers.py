"""Parameter containers and the basic layers built on tensor ops."""

from __future__ import annotations

from typing import Dict, Iterator, Mapping, Optional, Tuple, TypeVar

import numpy as np

from ..errors import CheckpointError
from ..tensor import Tensor, parameter
from ..tensor import ops

INIT_STD = 0.02

M = TypeVar("M", bound="Module")


def truncated_normal(rng: np.random.Generator, shape: Tuple[int, ...], std: float = INIT_STD) -> np.ndarray:
    """Normal(0, std) redrawn until every entry lies within two standard deviations."""
    values = rng.standard_normal(shape)
    outside = np.abs(values) > 2.0
    while np.any(outside):
        values[outside] = rng.standard_normal(int(outside.sum()))
        outside = np.abs(values) > 2.0
    return values * std


class Module:
    """Owns named parameters and child modules; names are dot-joined paths."""

    def __init__(self) -> None:
        self._params: Dict[str, Tensor] = {}
        self._children: Dict[str, Module] = {}

    def param(self, name: str, data: np.ndarray) -> Tensor:
        tensor = parameter(data, name=name)
        self._params[name] = tensor
        return tensor

    def child(self, name: str, module: M) -> M:
        self._children[name] = module
        return module

    def _walk(self, prefix: str) -> Iterator[Tuple[str, Tensor]]:
        for name, tensor in self._params.items():
            yield prefix + name, tensor
        for name, module in self._children.items():
            yield from module._walk(f"{prefix}{name}.")

    def named_parameters(self) -> Dict[str, Tensor]:
        return dict(self._walk(""))

    def state(self) -> Dict[str, np.ndarray]:
        return {name: tensor.data.copy() for name, tensor in self.named_parameters().items()}

    def load_state(self, weights: Mapping[str, np.ndarray]) -> None:
        params = self.named_parameters()
        missing = sorted(set(params) - set(weights))
        unexpected = sorted(set(weights) - set(params))
        if missing or unexpected:
            raise CheckpointError(f"weight names do not match the model: missing={missing[:5]} unexpected={unexpected[:5]}")
        for name, tensor in params.items():
            value = np.asarray(weights[name], dtype=np.float64)
            if value.shape != tensor.shape:
                raise CheckpointError(f"{name}: checkpoint shape {value.shape} != model shape {tensor.shape}")
            tensor.data[...] = value

    def zero_grad(self) -> None:
        for tensor in self.named_parameters().values():
            tensor.grad = None


class Linear(Module):
    def __init__(self, d_in: int, d_out: int, rng: np.random.Generator, *, bias: bool = True) -> None:
        super().__init__()
        self.weight = self.param("weight", truncated_normal(rng, (d_in, d_out)))
        self.bias: Optional[Tensor] = self.param("bias", np.zeros(d_out)) if bias else None

    def __call__(self, x: Tensor) -> Tensor:
        out = ops.matmul(x, self.weight)
        return ops.add(out, self.bias) if self.bias is not None else out


class Conv1d(Module):
    def __init__(
        self,
        c_in: int,
        c_out: int,
        kernel: int,
        rng: np.random.Generator,
        *,
        stride: int = 1,
        padding: Optional[int] = None,
        zero_init: bool = False,
    ) -> None:
        super().__init__()
        shape = (c_out, c_in, kernel)
        self.weight = self.param("weight", np.zeros(shape) if zero_init else truncated_normal(rng, shape))
        self.bias = self.param("bias", np.zeros(c_out))
        self.stride = stride
        self.padding = kernel // 2 if padding is None else padding

    def __call__(self, x: Tensor) -> Tensor:
        return ops.conv1d(x, self.weight, self.bias, stride=self.stride, padding=self.padding)


class ConvTranspose1d(Module):
    def __init__(self, c_in: int, c_out: int, kernel: int, rng: np.random.Generator, *, padding: int = 1) -> None:
        super().__init__()
        self.weight = self.param("weight", truncated_normal(rng, (c_in, c_out, kernel)))
        self.bias = self.param("bias", np.zeros(c_out))
        self.padding = padding

    def __call__(self, x: Tensor) -> Tensor:
        return ops.conv_transpose1d(x, self.weight, self.bias, stride=2, padding=self.padding)


class GroupNorm(Module):
    def __init__(self, groups: int, channels: int) -> None:
        super().__init__()
        self.groups = groups
        self.gamma = self.param("gamma", np.ones(channels))
        self.beta = self.param("beta", np.zeros(channels))

    def __call__(self, x: Tensor) -> Tensor:
        return ops.group_norm(x, self.groups, self.gamma, self.beta)


class LayerNorm(Module):
    def __init__(self, features: int) -> None:
        super().__init__()
        self.gamma = self.param("gamma", np.ones(features))
        self.beta = self.param("beta", np.zeros(features))

    def __call__(self, x: Tensor) -> Tensor:
        return ops.layer_norm(x, self.gamma, self.beta)


class MLP(Module):
    """Linear -> Mish -> Linear."""

    def __init__(self, d_in: int, d_hidden: int, d_out: int, rng: np.random.Generator) -> None:
        super().__init__()
        self.fc1 = self.child("fc1", Linear(d_in, d_hidden, rng))
        self.fc2 = self.child("fc2", Linear(d_hidden, d_out, rng))

    def __call__(self, x: Tensor) -> Tensor:
        return self.fc2(ops.mish(self.fc1(x)))
