"""Multi-head attention and the bottleneck attention bridge."""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..errors import ShapeError
from ..tensor import Tensor
from ..tensor import ops
from .encoders import ContextTokens
from .layers import LayerNorm, Linear, Module


class MultiHeadAttention(Module):
    def __init__(self, d_model: int, n_heads: int, head_dim: int, rng: np.random.Generator) -> None:
        super().__init__()
        self.n_heads = n_heads
        self.head_dim = head_dim
        width = n_heads * head_dim
        self.query = self.child("query", Linear(d_model, width, rng))
        self.key = self.child("key", Linear(d_model, width, rng))
        self.value = self.child("value", Linear(d_model, width, rng))
        self.out = self.child("out", Linear(width, d_model, rng))

    def _heads(self, x: Tensor) -> Tensor:
        batch, length, _ = x.shape
        return ops.transpose(ops.reshape(x, (batch, length, self.n_heads, self.head_dim)), (0, 2, 1, 3))

    def __call__(self, x: Tensor, kv: Tensor, mask: Optional[np.ndarray] = None) -> Tensor:
        """``x`` (B, Lq, d) attends over ``kv`` (B, Lk, d); ``mask`` (B, Lk) is True for real keys."""
        if x.ndim != 3 or kv.ndim != 3 or x.shape[0] != kv.shape[0]:
            raise ShapeError("attention", x.shape, kv.shape)
        batch, length, _ = x.shape
        q = self._heads(self.query(x))
        k = self._heads(self.key(kv))
        v = self._heads(self.value(kv))
        key_mask = None if mask is None else mask[:, None, None, :]
        attended = ops.scaled_dot_product_attention(q, k, v, key_mask)
        merged = ops.reshape(ops.transpose(attended, (0, 2, 1, 3)), (batch, length, self.n_heads * self.head_dim))
        return self.out(merged)


class FeedForward(Module):
    def __init__(self, d_model: int, hidden: int, rng: np.random.Generator) -> None:
        super().__init__()
        self.fc1 = self.child("fc1", Linear(d_model, hidden, rng))
        self.fc2 = self.child("fc2", Linear(hidden, d_model, rng))

    def __call__(self, x: Tensor) -> Tensor:
        return self.fc2(ops.gelu(self.fc1(x)))


class AttentionBridge(Module):
    """Pre-norm residual stack: self-attention, cross-attention to ``[z_t] + z_C``, feed-forward.

    The time token is always present among the keys, so an empty context
    still yields a well-defined cross-attention.
    """

    def __init__(self, d_z: int, n_heads: int, head_dim: int, ffn_mult: int, rng: np.random.Generator) -> None:
        super().__init__()
        self.norm_self = self.child("norm_self", LayerNorm(d_z))
        self.self_attn = self.child("self_attn", MultiHeadAttention(d_z, n_heads, head_dim, rng))
        self.norm_cross = self.child("norm_cross", LayerNorm(d_z))
        self.norm_kv = self.child("norm_kv", LayerNorm(d_z))
        self.cross_attn = self.child("cross_attn", MultiHeadAttention(d_z, n_heads, head_dim, rng))
        self.norm_ffn = self.child("norm_ffn", LayerNorm(d_z))
        self.ffn = self.child("ffn", FeedForward(d_z, ffn_mult * d_z, rng))

    def __call__(self, tokens: Tensor, z_t: Tensor, context: ContextTokens) -> Tensor:
        """``tokens`` (B, L_b, d_z), ``z_t`` (B, d_z) -> (B, L_b, d_z)."""
        batch = tokens.shape[0]
        if z_t.shape != (batch, tokens.shape[2]):
            raise ShapeError("attention_bridge", tokens.shape, z_t.shape)
        time_token = ops.reshape(z_t, (batch, 1, z_t.shape[1]))
        if context.tokens is None or context.width == 0:
            kv, mask = time_token, None
        else:
            if context.tokens.shape[0] != batch:
                raise ShapeError("attention_bridge", tokens.shape, context.tokens.shape, detail="context batch")
            kv = ops.concat([time_token, context.tokens], axis=1)
            mask = np.concatenate([np.ones((batch, 1), dtype=bool), context.mask], axis=1)
        h = self.norm_self(tokens)
        tokens = ops.add(tokens, self.self_attn(h, h))
        tokens = ops.add(tokens, self.cross_attn(self.norm_cross(tokens), self.norm_kv(kv), mask))
        return ops.add(tokens, self.ffn(self.norm_ffn(tokens)))
