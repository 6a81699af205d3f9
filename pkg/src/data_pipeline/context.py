"""Typed context instances and the context-type registry."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Mapping, Tuple

from ..errors import ContextTypeError
from ..geometry import Environment

SPHERE_2D = 0


@dataclass(frozen=True)
class ContextType:
    type_id: int
    name: str
    dim: int


DEFAULT_CONTEXT_TYPES: Dict[int, ContextType] = {SPHERE_2D: ContextType(SPHERE_2D, "sphere2d", 3)}


@dataclass(frozen=True)
class ContextInstance:
    type_id: int
    params: Tuple[float, ...]


# An empty ContextSet is the unconditional context.
ContextSet = Tuple[ContextInstance, ...]
EMPTY_CONTEXT: ContextSet = ()


def check_context(context: ContextSet, registry: Mapping[int, int]) -> None:
    """``registry`` maps type-id to parameter dimension."""
    for instance in context:
        if instance.type_id not in registry:
            raise ContextTypeError(f"context type {instance.type_id} is not registered (known: {sorted(registry)})")
        if len(instance.params) != registry[instance.type_id]:
            raise ContextTypeError(
                f"context type {instance.type_id}: expected {registry[instance.type_id]} params, "
                f"got {len(instance.params)}"
            )


def registry_dims(types: Mapping[int, ContextType] = DEFAULT_CONTEXT_TYPES) -> Dict[int, int]:
    return {type_id: ctype.dim for type_id, ctype in types.items()}


def context_from_environment(env: Environment) -> ContextSet:
    """One sphere2d instance ``[x, y, r]`` per obstacle, in creation order."""
    return tuple(
        ContextInstance(SPHERE_2D, (float(o.center[0]), float(o.center[1]), float(o.radius))) for o in env.obstacles
    )
