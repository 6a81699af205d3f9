"""Time and context encoders."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np

from ..data_pipeline.context import ContextSet, check_context
from ..errors import TimestepError
from ..tensor import Tensor
from ..tensor import ops
from .layers import MLP, Module

PE_BASE = 10_000.0


def positional_encoding(t: int | np.ndarray, d_z: int) -> np.ndarray:
    """Interleaved sin/cos pairs at geometric frequencies; shape (..., d_z)."""
    t = np.asarray(t, dtype=np.float64)
    freqs = PE_BASE ** (-np.arange(0, d_z, 2) / d_z)
    angles = t[..., None] * freqs
    out = np.empty(t.shape + (d_z,))
    out[..., 0::2] = np.sin(angles)
    out[..., 1::2] = np.cos(angles)
    return out


def check_timesteps(t: np.ndarray, t_max: int) -> np.ndarray:
    t = np.atleast_1d(np.asarray(t))
    if not np.issubdtype(t.dtype, np.integer) and not np.all(np.equal(np.mod(t, 1), 0)):
        raise TimestepError(f"timesteps must be integers, got {t}")
    if t.size and (t.min() < 1 or t.max() > t_max):
        raise TimestepError(f"timestep out of range [1, {t_max}]: {t.min()}..{t.max()}")
    return t.astype(np.int64)


class TimeEncoder(Module):
    def __init__(self, d_z: int, hidden: int, t_max: int, rng: np.random.Generator) -> None:
        super().__init__()
        self.d_z = d_z
        self.t_max = t_max
        self.mlp = self.child("mlp", MLP(d_z, hidden, d_z, rng))

    def __call__(self, t: int | Sequence[int] | np.ndarray) -> Tensor:
        """(B,) timesteps -> (B, d_z) latents."""
        steps = check_timesteps(np.asarray(t), self.t_max)
        return self.mlp(Tensor(positional_encoding(steps, self.d_z)))


@dataclass
class ContextTokens:
    """Padded per-batch context latents; ``mask`` marks real tokens."""

    tokens: Optional[Tensor]
    mask: np.ndarray

    @property
    def width(self) -> int:
        return self.mask.shape[1]


class ContextEncoder(Module):
    """One MLP per registered context type; no positional information."""

    def __init__(self, types: Mapping[int, int], d_z: int, hidden: int, rng: np.random.Generator) -> None:
        super().__init__()
        self.types = dict(sorted(types.items()))
        self.d_z = d_z
        self.mlps: Dict[int, MLP] = {
            type_id: self.child(str(type_id), MLP(dim, hidden, d_z, rng)) for type_id, dim in self.types.items()
        }

    def encode_set(self, context: ContextSet) -> List[Tensor]:
        """One (d_z,) latent per instance, in input order; empty set -> empty list."""
        check_context(context, self.types)
        out = []
        for instance in context:
            z = self.mlps[instance.type_id](Tensor(np.asarray(instance.params)[None, :]))
            out.append(ops.reshape(z, (self.d_z,)))
        return out

    def __call__(self, contexts: Sequence[ContextSet]) -> ContextTokens:
        """Batch encode; tokens are grouped by type id and padded to the batch maximum."""
        batch = len(contexts)
        for context in contexts:
            check_context(context, self.types)
        pieces: List[Tensor] = []
        masks: List[np.ndarray] = []
        for type_id, dim in self.types.items():
            rows = [[inst.params for inst in context if inst.type_id == type_id] for context in contexts]
            width = max((len(r) for r in rows), default=0)
            if width == 0:
                continue
            params = np.zeros((batch, width, dim))
            mask = np.zeros((batch, width), dtype=bool)
            for b, row in enumerate(rows):
                if row:
                    params[b, : len(row)] = row
                    mask[b, : len(row)] = True
            pieces.append(self.mlps[type_id](Tensor(params)))
            masks.append(mask)
        if not pieces:
            return ContextTokens(tokens=None, mask=np.zeros((batch, 0), dtype=bool))
        tokens = pieces[0] if len(pieces) == 1 else ops.concat(pieces, axis=1)
        return ContextTokens(tokens=tokens, mask=np.concatenate(masks, axis=1))
