"""Dense float64 tensors and the record-then-reverse tape."""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import AutogradError

BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]

_node_ids = itertools.count(1)
_local = threading.local()


def _tape_stack() -> List["Tape"]:
    stack = getattr(_local, "stack", None)
    if stack is None:
        stack = []
        _local.stack = stack
    return stack


def current_tape() -> Optional["Tape"]:
    """Innermost tape active on this thread, if any."""
    stack = _tape_stack()
    return stack[-1] if stack else None


class Tensor:
    """Row-major float64 array with an optional gradient buffer."""

    __slots__ = ("data", "grad", "requires_grad", "node_id", "name", "tape")

    def __init__(self, data: Any, *, requires_grad: bool = False, name: str | None = None) -> None:
        self.data = np.array(data, dtype=np.float64)
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad
        self.node_id = next(_node_ids)
        self.name = name
        self.tape: Optional[Tape] = None

    @classmethod
    def wrap(cls, array: np.ndarray) -> "Tensor":
        """Adopt an already-float64 array without copying."""
        tensor = cls.__new__(cls)
        tensor.data = array if array.dtype == np.float64 else array.astype(np.float64)
        tensor.grad = None
        tensor.requires_grad = False
        tensor.node_id = next(_node_ids)
        tensor.name = None
        tensor.tape = None
        return tensor

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        if self.data.size != 1:
            raise AutogradError(f"item() needs a single element, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> None:
        if self.tape is None:
            raise AutogradError("backward: tensor was not produced by a recorded primitive")
        self.tape.backward(self)

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{label}, requires_grad={self.requires_grad})"

    # operator sugar; the primitives live in ops
    def __add__(self, other: Any) -> "Tensor":
        from . import ops

        return ops.add(self, other)

    def __radd__(self, other: Any) -> "Tensor":
        from . import ops

        return ops.add(other, self)

    def __sub__(self, other: Any) -> "Tensor":
        from . import ops

        return ops.sub(self, other)

    def __rsub__(self, other: Any) -> "Tensor":
        from . import ops

        return ops.sub(other, self)

    def __mul__(self, other: Any) -> "Tensor":
        from . import ops

        if isinstance(other, (int, float)):
            return ops.scale(self, float(other))
        return ops.mul(self, other)

    def __rmul__(self, other: Any) -> "Tensor":
        return self.__mul__(other)

    def __neg__(self) -> "Tensor":
        from . import ops

        return ops.scale(self, -1.0)

    def __matmul__(self, other: "Tensor") -> "Tensor":
        from . import ops

        return ops.matmul(self, other)

    def __getitem__(self, key: Any) -> "Tensor":
        from . import ops

        return ops.index(self, key)

    def reshape(self, *shape: int) -> "Tensor":
        from . import ops

        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return ops.reshape(self, shape)

    def transpose(self, *axes: int) -> "Tensor":
        from . import ops

        return ops.transpose(self, axes or None)

    def sum(self, axis: int | Tuple[int, ...] | None = None, keepdims: bool = False) -> "Tensor":
        from . import ops

        return ops.sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis: int | Tuple[int, ...] | None = None, keepdims: bool = False) -> "Tensor":
        from . import ops

        return ops.mean(self, axis=axis, keepdims=keepdims)


@dataclass
class TapeRecord:
    op: str
    inputs: Tuple[Tensor, ...]
    output: Tensor
    backward: BackwardFn


class Tape:
    """Ordered log of primitive applications; replayed in reverse by ``backward``.

    Tapes are activated with ``with Tape() as tape:`` and are thread-local, so
    independent tapes can run on separate threads.
    """

    def __init__(self) -> None:
        self.records: List[TapeRecord] = []

    def __enter__(self) -> "Tape":
        _tape_stack().append(self)
        return self

    def __exit__(self, *exc: Any) -> None:
        stack = _tape_stack()
        if stack and stack[-1] is self:
            stack.pop()
        elif self in stack:
            stack.remove(self)

    def __len__(self) -> int:
        return len(self.records)

    def record(self, op: str, inputs: Tuple[Tensor, ...], output: Tensor, backward: BackwardFn) -> None:
        output.tape = self
        self.records.append(TapeRecord(op=op, inputs=inputs, output=output, backward=backward))

    def backward(self, loss: Tensor) -> None:
        """Populate ``grad`` on every tensor reachable from ``loss``; gradients accumulate."""
        if loss.size != 1:
            raise AutogradError(f"backward: loss must be scalar, got shape {loss.shape}")
        if loss.tape is not self:
            raise AutogradError("backward: loss is detached from this tape")
        pending: Dict[int, np.ndarray] = {loss.node_id: np.ones_like(loss.data)}
        owners: Dict[int, Tensor] = {loss.node_id: loss}
        for record in reversed(self.records):
            upstream = pending.pop(record.output.node_id, None)
            if upstream is None:
                continue
            _accumulate(record.output, upstream)
            input_grads = record.backward(upstream)
            for tensor, grad in zip(record.inputs, input_grads):
                if grad is None or not tensor.requires_grad:
                    continue
                if grad.shape != tensor.shape:
                    raise AutogradError(
                        f"backward: {record.op} produced gradient {grad.shape} for input {tensor.shape}"
                    )
                if tensor.node_id in pending:
                    pending[tensor.node_id] = pending[tensor.node_id] + grad
                else:
                    pending[tensor.node_id] = grad
                    owners[tensor.node_id] = tensor
        for node_id, grad in pending.items():
            _accumulate(owners[node_id], grad)


def _accumulate(tensor: Tensor, grad: np.ndarray) -> None:
    if tensor.grad is None:
        tensor.grad = np.array(grad, dtype=np.float64)
    else:
        tensor.grad = tensor.grad + grad


def parameter(data: Any, name: str | None = None) -> Tensor:
    """Leaf tensor that collects gradients."""
    return Tensor(data, requires_grad=True, name=name)
