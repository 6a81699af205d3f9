"""Differentiable primitives.

Every primitive computes its forward value with numpy and, when a tape is
active and some input requires a gradient, records a closure that maps the
output gradient to one gradient per input.
"""

from __future__ import annotations

import math
from typing import Any, Optional, Sequence, Tuple

import numpy as np

from ..errors import ShapeError
from .core import Tensor, current_tape

PRIMITIVES = frozenset(
    {
        "add",
        "sub",
        "mul",
        "scale",
        "matmul",
        "conv1d",
        "conv_transpose1d",
        "group_norm",
        "layer_norm",
        "mish",
        "gelu",
        "softmax",
        "concat",
        "index",
        "reshape",
        "transpose",
        "sum",
        "mean",
        "scaled_dot_product_attention",
    }
)

MASK_FILL = -1.0e9


def primitive_catalog() -> frozenset[str]:
    """Names of the differentiable primitives this library provides."""
    return PRIMITIVES


def as_tensor(value: Any) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


def _emit(op: str, out: np.ndarray, inputs: Tuple[Tensor, ...], backward) -> Tensor:
    result = Tensor.wrap(np.asarray(out, dtype=np.float64))
    tape = current_tape()
    if tape is not None and any(t.requires_grad for t in inputs):
        result.requires_grad = True
        tape.record(op, inputs, result, backward)
    return result


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    if grad.shape == shape:
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_shape(op: str, a: Tensor, b: Tensor) -> Tuple[int, ...]:
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError as exc:
        raise ShapeError(op, a.shape, b.shape) from exc


# --------------------------------------------------------------- elementwise
def add(a: Any, b: Any) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("add", a, b)

    def backward(g: np.ndarray):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return _emit("add", a.data + b.data, (a, b), backward)


def sub(a: Any, b: Any) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("sub", a, b)

    def backward(g: np.ndarray):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return _emit("sub", a.data - b.data, (a, b), backward)


def mul(a: Any, b: Any) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("mul", a, b)

    def backward(g: np.ndarray):
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return _emit("mul", a.data * b.data, (a, b), backward)


def scale(a: Tensor, factor: float) -> Tensor:
    factor = float(factor)

    def backward(g: np.ndarray):
        return (g * factor,)

    return _emit("scale", a.data * factor, (a,), backward)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise ShapeError("matmul", a.shape, b.shape)
    try:
        np.broadcast_shapes(a.shape[:-2], b.shape[:-2])
    except ValueError as exc:
        raise ShapeError("matmul", a.shape, b.shape, detail="batch dims") from exc

    def backward(g: np.ndarray):
        ga = g @ np.swapaxes(b.data, -1, -2)
        gb = np.swapaxes(a.data, -1, -2) @ g
        return _unbroadcast(ga, a.shape), _unbroadcast(gb, b.shape)

    return _emit("matmul", a.data @ b.data, (a, b), backward)


# ------------------------------------------------------------- convolutions
def conv1d(x: Tensor, weight: Tensor, bias: Optional[Tensor] = None, *, stride: int = 1, padding: int = 0) -> Tensor:
    """Batched 1-D convolution; x is (B, C_in, L), weight is (C_out, C_in, K)."""
    if x.ndim != 3 or weight.ndim != 3 or x.shape[1] != weight.shape[1]:
        raise ShapeError("conv1d", x.shape, weight.shape)
    if stride not in (1, 2):
        raise ShapeError("conv1d", x.shape, weight.shape, detail=f"unsupported stride {stride}")
    if bias is not None and bias.shape != (weight.shape[0],):
        raise ShapeError("conv1d", weight.shape, bias.shape, detail="bias")
    batch, _, length = x.shape
    c_out, _, kernel = weight.shape
    out_len = (length + 2 * padding - kernel) // stride + 1
    if out_len < 1:
        raise ShapeError("conv1d", x.shape, weight.shape, detail="kernel larger than padded input")
    xp = np.pad(x.data, ((0, 0), (0, 0), (padding, padding)))
    span = stride * (out_len - 1) + 1
    out = np.zeros((batch, c_out, out_len))
    for k in range(kernel):
        out += np.einsum("oc,bcl->bol", weight.data[:, :, k], xp[:, :, k : k + span : stride])
    if bias is not None:
        out += bias.data[None, :, None]
    inputs = (x, weight) if bias is None else (x, weight, bias)

    def backward(g: np.ndarray):
        gxp = np.zeros_like(xp)
        gw = np.zeros_like(weight.data)
        for k in range(kernel):
            window = xp[:, :, k : k + span : stride]
            gxp[:, :, k : k + span : stride] += np.einsum("oc,bol->bcl", weight.data[:, :, k], g)
            gw[:, :, k] = np.einsum("bol,bcl->oc", g, window)
        gx = gxp[:, :, padding : padding + length]
        if bias is None:
            return gx, gw
        return gx, gw, g.sum(axis=(0, 2))

    return _emit("conv1d", out, inputs, backward)


def conv_transpose1d(
    x: Tensor, weight: Tensor, bias: Optional[Tensor] = None, *, stride: int = 2, padding: int = 0
) -> Tensor:
    """Transposed 1-D convolution; x is (B, C_in, L), weight is (C_in, C_out, K)."""
    if x.ndim != 3 or weight.ndim != 3 or x.shape[1] != weight.shape[0]:
        raise ShapeError("conv_transpose1d", x.shape, weight.shape)
    if bias is not None and bias.shape != (weight.shape[1],):
        raise ShapeError("conv_transpose1d", weight.shape, bias.shape, detail="bias")
    batch, _, length = x.shape
    _, c_out, kernel = weight.shape
    full_len = (length - 1) * stride + kernel
    out_len = full_len - 2 * padding
    if out_len < 1:
        raise ShapeError("conv_transpose1d", x.shape, weight.shape, detail="padding exceeds output")
    span = stride * (length - 1) + 1
    full = np.zeros((batch, c_out, full_len))
    for k in range(kernel):
        full[:, :, k : k + span : stride] += np.einsum("io,bil->bol", weight.data[:, :, k], x.data)
    out = full[:, :, padding : padding + out_len].copy()
    if bias is not None:
        out += bias.data[None, :, None]
    inputs = (x, weight) if bias is None else (x, weight, bias)

    def backward(g: np.ndarray):
        gfull = np.zeros((batch, c_out, full_len))
        gfull[:, :, padding : padding + out_len] = g
        gx = np.zeros_like(x.data)
        gw = np.zeros_like(weight.data)
        for k in range(kernel):
            window = gfull[:, :, k : k + span : stride]
            gx += np.einsum("io,bol->bil", weight.data[:, :, k], window)
            gw[:, :, k] = np.einsum("bil,bol->io", x.data, window)
        if bias is None:
            return gx, gw
        return gx, gw, g.sum(axis=(0, 2))

    return _emit("conv_transpose1d", out, inputs, backward)


# ------------------------------------------------------------ normalization
def _normalize_backward(dxhat: np.ndarray, xhat: np.ndarray, inv_std: np.ndarray, axis: int) -> np.ndarray:
    count = dxhat.shape[axis]
    total = dxhat.sum(axis=axis, keepdims=True)
    dot = (dxhat * xhat).sum(axis=axis, keepdims=True)
    return inv_std / count * (count * dxhat - total - xhat * dot)


def group_norm(
    x: Tensor,
    groups: int,
    gamma: Optional[Tensor] = None,
    beta: Optional[Tensor] = None,
    *,
    eps: float = 1e-8,
) -> Tensor:
    """Group normalization of a (B, C, L) tensor with per-channel affine."""
    if x.ndim != 3 or groups < 1 or x.shape[1] % groups != 0:
        raise ShapeError("group_norm", x.shape, (groups,), detail="channels must divide into groups")
    batch, channels, length = x.shape
    for name, param in (("gamma", gamma), ("beta", beta)):
        if param is not None and param.shape != (channels,):
            raise ShapeError("group_norm", x.shape, param.shape, detail=name)
    grouped = x.data.reshape(batch, groups, -1)
    mu = grouped.mean(axis=-1, keepdims=True)
    centered = grouped - mu
    inv_std = 1.0 / np.sqrt((centered**2).mean(axis=-1, keepdims=True) + eps)
    xhat_grouped = centered * inv_std
    xhat = xhat_grouped.reshape(batch, channels, length)
    out = xhat
    if gamma is not None:
        out = out * gamma.data[None, :, None]
    if beta is not None:
        out = out + beta.data[None, :, None]
    inputs = tuple(t for t in (x, gamma, beta) if t is not None)

    def backward(g: np.ndarray):
        dxhat = g * gamma.data[None, :, None] if gamma is not None else g
        dx = _normalize_backward(dxhat.reshape(batch, groups, -1), xhat_grouped, inv_std, axis=-1)
        grads = [dx.reshape(batch, channels, length)]
        if gamma is not None:
            grads.append((g * xhat).sum(axis=(0, 2)))
        if beta is not None:
            grads.append(g.sum(axis=(0, 2)))
        return grads

    return _emit("group_norm", out, inputs, backward)


def layer_norm(
    x: Tensor,
    gamma: Optional[Tensor] = None,
    beta: Optional[Tensor] = None,
    *,
    eps: float = 1e-8,
) -> Tensor:
    """Normalize over the last axis."""
    features = x.shape[-1]
    for name, param in (("gamma", gamma), ("beta", beta)):
        if param is not None and param.shape != (features,):
            raise ShapeError("layer_norm", x.shape, param.shape, detail=name)
    mu = x.data.mean(axis=-1, keepdims=True)
    centered = x.data - mu
    inv_std = 1.0 / np.sqrt((centered**2).mean(axis=-1, keepdims=True) + eps)
    xhat = centered * inv_std
    out = xhat
    if gamma is not None:
        out = out * gamma.data
    if beta is not None:
        out = out + beta.data
    inputs = tuple(t for t in (x, gamma, beta) if t is not None)
    reduce_axes = tuple(range(x.ndim - 1))

    def backward(g: np.ndarray):
        dxhat = g * gamma.data if gamma is not None else g
        grads = [_normalize_backward(dxhat, xhat, inv_std, axis=-1)]
        if gamma is not None:
            grads.append((g * xhat).sum(axis=reduce_axes))
        if beta is not None:
            grads.append(g.sum(axis=reduce_axes))
        return grads

    return _emit("layer_norm", out, inputs, backward)


# ---------------------------------------------------------------- activations
def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def mish(x: Tensor) -> Tensor:
    softplus = np.logaddexp(0.0, x.data)
    tsp = np.tanh(softplus)

    def backward(g: np.ndarray):
        return (g * (tsp + x.data * (1.0 - tsp**2) * _sigmoid(x.data)),)

    return _emit("mish", x.data * tsp, (x,), backward)


_GELU_C = math.sqrt(2.0 / math.pi)


def gelu(x: Tensor) -> Tensor:
    """GELU, tanh approximation."""
    u = _GELU_C * (x.data + 0.044715 * x.data**3)
    th = np.tanh(u)

    def backward(g: np.ndarray):
        du = _GELU_C * (1.0 + 3 * 0.044715 * x.data**2)
        return (g * (0.5 * (1.0 + th) + 0.5 * x.data * (1.0 - th**2) * du),)

    return _emit("gelu", 0.5 * x.data * (1.0 + th), (x,), backward)


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    exps = np.exp(shifted)
    y = exps / exps.sum(axis=axis, keepdims=True)

    def backward(g: np.ndarray):
        return (y * (g - (g * y).sum(axis=axis, keepdims=True)),)

    return _emit("softmax", y, (x,), backward)


# ------------------------------------------------------------ structural ops
def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = tuple(as_tensor(t) for t in tensors)
    if not tensors:
        raise ShapeError("concat", detail="no inputs")
    ndim = tensors[0].ndim
    axis = axis % ndim
    for t in tensors[1:]:
        if t.ndim != ndim or any(t.shape[d] != tensors[0].shape[d] for d in range(ndim) if d != axis):
            raise ShapeError("concat", tensors[0].shape, t.shape)
    sizes = [t.shape[axis] for t in tensors]
    cuts = np.cumsum(sizes)[:-1]

    def backward(g: np.ndarray):
        return np.split(g, cuts, axis=axis)

    return _emit("concat", np.concatenate([t.data for t in tensors], axis=axis), tensors, backward)


def _is_basic_key(key: Any) -> bool:
    parts = key if isinstance(key, tuple) else (key,)
    return all(isinstance(p, (slice, int, np.integer)) or p is Ellipsis or p is None for p in parts)


def index(x: Tensor, key: Any) -> Tensor:
    """Slicing / indexing (basic and integer-array keys)."""
    out = np.array(x.data[key], dtype=np.float64)
    basic = _is_basic_key(key)

    def backward(g: np.ndarray):
        grad = np.zeros_like(x.data)
        if basic:
            grad[key] = g
        else:
            np.add.at(grad, key, g)
        return (grad,)

    return _emit("index", out, (x,), backward)


def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    try:
        out = x.data.reshape(tuple(shape))
    except ValueError as exc:
        raise ShapeError("reshape", x.shape, tuple(shape)) from exc

    def backward(g: np.ndarray):
        return (g.reshape(x.shape),)

    return _emit("reshape", out, (x,), backward)


def transpose(x: Tensor, axes: Optional[Sequence[int]] = None) -> Tensor:
    axes = tuple(range(x.ndim))[::-1] if axes is None else tuple(axes)
    if sorted(a % x.ndim for a in axes) != list(range(x.ndim)):
        raise ShapeError("transpose", x.shape, axes)
    inverse = tuple(np.argsort([a % x.ndim for a in axes]))

    def backward(g: np.ndarray):
        return (np.transpose(g, inverse),)

    return _emit("transpose", np.transpose(x.data, axes), (x,), backward)


def swapaxes(x: Tensor, a: int, b: int) -> Tensor:
    axes = list(range(x.ndim))
    axes[a], axes[b] = axes[b], axes[a]
    return transpose(x, axes)


def _expand_reduced(g: np.ndarray, shape: Tuple[int, ...], axis, keepdims: bool) -> np.ndarray:
    if axis is not None and not keepdims:
        axes = (axis,) if isinstance(axis, int) else tuple(axis)
        g = np.expand_dims(g, tuple(a % len(shape) for a in axes))
    return np.broadcast_to(g, shape).copy()


def sum(x: Tensor, axis: int | Tuple[int, ...] | None = None, keepdims: bool = False) -> Tensor:  # noqa: A001
    def backward(g: np.ndarray):
        return (_expand_reduced(g, x.shape, axis, keepdims),)

    return _emit("sum", np.asarray(x.data.sum(axis=axis, keepdims=keepdims), dtype=np.float64), (x,), backward)


def mean(x: Tensor, axis: int | Tuple[int, ...] | None = None, keepdims: bool = False) -> Tensor:
    count = x.size if axis is None else int(np.prod([x.shape[a] for a in ((axis,) if isinstance(axis, int) else axis)]))

    def backward(g: np.ndarray):
        return (_expand_reduced(g, x.shape, axis, keepdims) / count,)

    return _emit("mean", np.asarray(x.data.mean(axis=axis, keepdims=keepdims), dtype=np.float64), (x,), backward)


# ---------------------------------------------------------------- composites
def scaled_dot_product_attention(
    query: Tensor, key: Tensor, value: Tensor, mask: Optional[np.ndarray] = None
) -> Tensor:
    """softmax(q kᵀ / sqrt(d) + mask) v, assembled from the primitives above.

    ``mask`` is a boolean array broadcastable to the score shape; False entries
    are excluded from the softmax.
    """
    if query.shape[-1] != key.shape[-1] or key.shape[-2] != value.shape[-2]:
        raise ShapeError("scaled_dot_product_attention", query.shape, key.shape, value.shape)
    scores = scale(matmul(query, swapaxes(key, -1, -2)), 1.0 / math.sqrt(query.shape[-1]))
    if mask is not None:
        scores = add(scores, Tensor(np.where(mask, 0.0, MASK_FILL)))
    return matmul(softmax(scores, axis=-1), value)
