"""Architecture hyperparameters of the noise-prediction network."""

from __future__ import annotations

from typing import Dict, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator


class ModelConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    d_z: int = Field(default=32, ge=2)
    depth: int = Field(default=3, ge=1)
    channels: Tuple[int, ...] = (32, 64, 128)
    n_heads: int = Field(default=4, ge=1)
    head_dim: int = Field(default=8, ge=1)
    groups: int = Field(default=8, ge=1)
    kernel_size: int = Field(default=5, ge=1)
    mlp_mult: int = Field(default=4, ge=1)
    horizon: int = Field(default=64, ge=2)
    d_q: int = Field(default=2, ge=1)
    t_train: int = Field(default=25, ge=1)
    context_types: Dict[int, int] = Field(default_factory=lambda: {0: 3})

    @model_validator(mode="after")
    def _consistent(self) -> "ModelConfig":
        if len(self.channels) != self.depth:
            raise ValueError(f"channels has {len(self.channels)} levels but depth is {self.depth}")
        stride = 2 ** (self.depth - 1)
        if self.horizon % stride:
            raise ValueError(f"horizon {self.horizon} must be divisible by 2^(depth-1) = {stride}")
        for width in self.channels:
            if width % self.groups:
                raise ValueError(f"channel width {width} is not divisible by groups={self.groups}")
        if self.d_z % 2:
            raise ValueError(f"d_z must be even for the sinusoidal encoding, got {self.d_z}")
        if self.kernel_size % 2 == 0:
            raise ValueError(f"kernel_size must be odd, got {self.kernel_size}")
        return self

    @property
    def attention_width(self) -> int:
        return self.n_heads * self.head_dim
