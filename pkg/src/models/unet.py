"""Temporal U-Net noise predictor conditioned on time and context."""

from __future__ import annotations

from typing import List, Optional, Sequence

import numpy as np

from ..data_pipeline.context import ContextSet
from ..errors import ShapeError
from ..tensor import Tensor
from ..tensor import ops
from .attention import AttentionBridge
from .config import ModelConfig
from .encoders import ContextEncoder, ContextTokens, TimeEncoder
from .layers import Conv1d, ConvTranspose1d, GroupNorm, Linear, Module


class ResidualTemporalBlock(Module):
    """conv -> GroupNorm -> time scale/shift -> Mish -> conv -> GroupNorm -> Mish, plus residual."""

    def __init__(self, c_in: int, c_out: int, config: ModelConfig, rng: np.random.Generator) -> None:
        super().__init__()
        self.c_out = c_out
        self.conv1 = self.child("conv1", Conv1d(c_in, c_out, config.kernel_size, rng))
        self.norm1 = self.child("norm1", GroupNorm(config.groups, c_out))
        self.time = self.child("time", Linear(config.d_z, 2 * c_out, rng))
        self.conv2 = self.child("conv2", Conv1d(c_out, c_out, config.kernel_size, rng))
        self.norm2 = self.child("norm2", GroupNorm(config.groups, c_out))
        self.residual: Optional[Conv1d] = (
            self.child("residual", Conv1d(c_in, c_out, 1, rng)) if c_in != c_out else None
        )

    def __call__(self, x: Tensor, z_t: Tensor) -> Tensor:
        batch = x.shape[0]
        modulation = ops.reshape(self.time(ops.mish(z_t)), (batch, 2 * self.c_out, 1))
        scale = ops.index(modulation, (slice(None), slice(0, self.c_out)))
        shift = ops.index(modulation, (slice(None), slice(self.c_out, None)))
        h = self.norm1(self.conv1(x))
        h = ops.add(ops.mul(h, ops.add(1.0, scale)), shift)
        h = ops.mish(h)
        h = ops.mish(self.norm2(self.conv2(h)))
        skip = self.residual(x) if self.residual is not None else x
        return ops.add(h, skip)


class _Level(Module):
    def __init__(self, c_in: int, c_out: int, config: ModelConfig, rng: np.random.Generator) -> None:
        super().__init__()
        self.block1 = self.child("block1", ResidualTemporalBlock(c_in, c_out, config, rng))
        self.block2 = self.child("block2", ResidualTemporalBlock(c_out, c_out, config, rng))

    def __call__(self, x: Tensor, z_t: Tensor) -> Tensor:
        return self.block2(self.block1(x, z_t), z_t)


class NoiseModel(Module):
    """epsilon_theta(tau_t, C, t).

    Trajectories enter as (B, H, d_q) and are convolved channels-first. The
    encoder halves the horizon between levels, the attention bridge runs on
    the bottleneck tokens and the decoder mirrors the encoder with skips.
    """

    def __init__(self, config: ModelConfig, rng: np.random.Generator) -> None:
        super().__init__()
        self.config = config
        d_z, hidden = config.d_z, config.mlp_mult * config.d_z
        self.time_encoder = self.child("time", TimeEncoder(d_z, hidden, config.t_train, rng))
        self.context_encoder = self.child("context", ContextEncoder(config.context_types, d_z, hidden, rng))
        widths = [config.d_q, *config.channels]
        self.down: List[_Level] = []
        self.downsample: List[Conv1d] = []
        for level in range(config.depth):
            self.down.append(self.child(f"down{level}", _Level(widths[level], widths[level + 1], config, rng)))
            if level < config.depth - 1:
                c = widths[level + 1]
                self.downsample.append(self.child(f"downsample{level}", Conv1d(c, c, 3, rng, stride=2, padding=1)))
        bottom = config.channels[-1]
        self.mid1 = self.child("mid1", ResidualTemporalBlock(bottom, bottom, config, rng))
        self.bridge_in = self.child("bridge_in", Linear(bottom, d_z, rng))
        self.bridge = self.child(
            "bridge", AttentionBridge(d_z, config.n_heads, config.head_dim, config.mlp_mult, rng)
        )
        self.bridge_out = self.child("bridge_out", Linear(d_z, bottom, rng))
        self.mid2 = self.child("mid2", ResidualTemporalBlock(bottom, bottom, config, rng))
        self.up: List[_Level] = []
        self.upsample: List[ConvTranspose1d] = []
        for level in reversed(range(config.depth - 1)):
            c_skip, c_out = config.channels[level + 1], config.channels[level]
            self.up.append(self.child(f"up{level}", _Level(2 * c_skip, c_out, config, rng)))
            self.upsample.append(self.child(f"upsample{level}", ConvTranspose1d(c_out, c_out, 4, rng)))
        first = config.channels[0]
        self.final_conv = self.child("final_conv", Conv1d(first, first, config.kernel_size, rng))
        self.final_norm = self.child("final_norm", GroupNorm(config.groups, first))
        self.head = self.child("head", Conv1d(first, config.d_q, 1, rng, zero_init=True))

    def encode_time(self, t: int | Sequence[int] | np.ndarray) -> Tensor:
        return self.time_encoder(t)

    def encode_context(self, contexts: Sequence[ContextSet]) -> ContextTokens:
        return self.context_encoder(contexts)

    def _bottleneck(self, x: Tensor, z_t: Tensor, context: ContextTokens) -> Tensor:
        tokens = ops.transpose(x, (0, 2, 1))
        bridged = self.bridge_out(self.bridge(self.bridge_in(tokens), z_t, context))
        return ops.transpose(ops.add(tokens, bridged), (0, 2, 1))

    def denoise(self, tau_t: Tensor | np.ndarray, z_t: Tensor, context: ContextTokens) -> Tensor:
        """Noise estimate from pre-encoded time and context latents."""
        tau_t = tau_t if isinstance(tau_t, Tensor) else Tensor(tau_t)
        expected = (self.config.horizon, self.config.d_q)
        if tau_t.ndim != 3 or tau_t.shape[1:] != expected:
            raise ShapeError("predict_noise", tau_t.shape, (-1, *expected))
        x = ops.transpose(tau_t, (0, 2, 1))
        skips: List[Tensor] = []
        for level, block in enumerate(self.down):
            x = block(x, z_t)
            if level > 0:
                skips.append(x)
            if level < len(self.downsample):
                x = self.downsample[level](x)
        x = self.mid1(x, z_t)
        x = self._bottleneck(x, z_t, context)
        x = self.mid2(x, z_t)
        for block, upsample in zip(self.up, self.upsample):
            skip = skips.pop()
            x = upsample(block(ops.concat([x, skip], axis=1), z_t))
        x = ops.mish(self.final_norm(self.final_conv(x)))
        return ops.transpose(self.head(x), (0, 2, 1))

    def __call__(
        self, tau_t: Tensor | np.ndarray, contexts: Sequence[ContextSet], t: int | Sequence[int] | np.ndarray
    ) -> Tensor:
        batch = tau_t.shape[0]
        steps = np.broadcast_to(np.asarray(t), (batch,))
        if len(contexts) != batch:
            raise ShapeError("predict_noise", tau_t.shape, (len(contexts),), detail="one context set per trajectory")
        return self.denoise(tau_t, self.encode_time(steps), self.encode_context(contexts))


def build_model(config: ModelConfig, seed: int = 0) -> NoiseModel:
    return NoiseModel(config, np.random.default_rng(seed))


def predict_noise(model: NoiseModel, tau_t: np.ndarray, context: ContextSet, t: int) -> np.ndarray:
    """Single-trajectory convenience: (H, d_q) in, (H, d_q) out."""
    out = model(np.asarray(tau_t, dtype=np.float64)[None], [context], [t])
    return out.data[0]
