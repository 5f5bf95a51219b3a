"""Dense tensors and the reverse-mode computation tape.

Operations in ``ops.py`` record themselves on the active tape whenever one
of their inputs requires a gradient. ``backward`` replays the tape in
reverse recording order and leaves the result in ``Tensor.grad``.
"""
from contextvars import ContextVar
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Optional, Protocol, Sequence, Tuple, Union

import numpy as np

from ..exceptions import ShapeError, TapeError

DEFAULT_DTYPE = np.float32

BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]

_active_tape: ContextVar[Optional["ComputationTape"]] = ContextVar("active_tape", default=None)


class Tensor:
    """n-dimensional float array with an optional gradient"""

    def __init__(
        self,
        data: Any,
        requires_grad: bool = False,
        name: Optional[str] = None,
        dtype: Optional[Any] = None,
    ):
        if dtype is None:
            dtype = data.dtype if isinstance(data, np.ndarray) and data.dtype in (np.float32, np.float64) else DEFAULT_DTYPE
        array = np.array(data, dtype=dtype, copy=True)
        if any(extent <= 0 for extent in array.shape):
            raise ShapeError(f"tensor extents must be positive, got {array.shape}")
        self.data: np.ndarray = array
        self.requires_grad = requires_grad
        self.name = name
        self.grad: Optional[np.ndarray] = None

    @classmethod
    def wrap(cls, array: np.ndarray, requires_grad: bool = False, name: Optional[str] = None) -> "Tensor":
        """Wrap an array without copying it"""
        tensor = cls.__new__(cls)
        tensor.data = array
        tensor.requires_grad = requires_grad
        tensor.name = name
        tensor.grad = None
        return tensor

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def size(self) -> int:
        return int(self.data.size)

    def numpy(self) -> np.ndarray:
        return self.data.copy()

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() needs a single value, tensor has shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}{label}, requires_grad={self.requires_grad})"


@dataclass
class TapeNode:
    """One recorded operation"""
    op: str
    inputs: Tuple[Tensor, ...]
    output: Tensor
    backward_fn: BackwardFn


@dataclass
class ComputationTape:
    """Ordered record of differentiable operations.

    Single-owner: record and backward must happen on one thread. Use as a
    context manager to make it the active tape.
    """
    nodes: List[TapeNode] = field(default_factory=list)
    _produced: Dict[int, int] = field(default_factory=dict)
    _token: Any = None

    def __enter__(self) -> "ComputationTape":
        self._token = _active_tape.set(self)
        return self

    def __exit__(self, *exc_info: Any) -> None:
        _active_tape.reset(self._token)
        self._token = None

    def record(self, op: str, inputs: Sequence[Tensor], output: Tensor, backward_fn: BackwardFn) -> None:
        self._produced[id(output)] = len(self.nodes)
        self.nodes.append(TapeNode(op=op, inputs=tuple(inputs), output=output, backward_fn=backward_fn))

    def produced(self, tensor: Tensor) -> bool:
        """Check whether a tensor is the output of a recorded operation"""
        index = self._produced.get(id(tensor))
        return index is not None and self.nodes[index].output is tensor

    def leaves(self) -> List[Tensor]:
        """Tensors requiring gradients that enter the tape from outside"""
        seen: Dict[int, Tensor] = {}
        for node in self.nodes:
            for tensor in node.inputs:
                if tensor.requires_grad and not self.produced(tensor):
                    seen.setdefault(id(tensor), tensor)
        return list(seen.values())

    def clear(self) -> None:
        self.nodes.clear()
        self._produced.clear()

    def __len__(self) -> int:
        return len(self.nodes)


class LossLike(Protocol):
    """Anything carrying a scalar ``tensor`` attribute"""
    tensor: Tensor


def active_tape() -> Optional[ComputationTape]:
    """Get the tape operations currently record onto, if any"""
    return _active_tape.get()


def backward(
    loss: Union[Tensor, "LossLike"],
    tape: Optional[ComputationTape] = None,
    params: Optional[Iterable[Tensor]] = None,
) -> Dict[Tensor, np.ndarray]:
    """Compute d(loss)/d(t) for every requires_grad leaf of the tape.

    Gradients are assigned (not accumulated) to ``Tensor.grad``. Tensors in
    ``params`` that the loss does not depend on get a zero gradient.
    """
    loss_tensor = loss.tensor if hasattr(loss, "tensor") else loss
    tape = tape if tape is not None else active_tape()
    if tape is None:
        raise TapeError("no computation tape to differentiate")
    if loss_tensor.data.size != 1:
        raise TapeError(f"loss must be scalar, got shape {loss_tensor.shape}")
    if not tape.produced(loss_tensor):
        raise TapeError("loss was not recorded on this tape (detached)")

    grads: Dict[int, np.ndarray] = {id(loss_tensor): np.ones_like(loss_tensor.data, dtype=np.float64)}
    for node in reversed(tape.nodes):
        upstream = grads.pop(id(node.output), None)
        if upstream is None:
            continue
        input_grads = node.backward_fn(upstream)
        for tensor, grad in zip(node.inputs, input_grads):
            if grad is None or not tensor.requires_grad:
                continue
            key = id(tensor)
            if key in grads:
                grads[key] = grads[key] + grad
            else:
                grads[key] = np.asarray(grad, dtype=np.float64)

    result: Dict[Tensor, np.ndarray] = {}
    targets = tape.leaves()
    if params is not None:
        known = {id(t) for t in targets}
        targets.extend(p for p in params if id(p) not in known)
    for tensor in targets:
        grad = grads.get(id(tensor))
        if grad is None:
            grad = np.zeros(tensor.shape, dtype=np.float64)
        tensor.grad = grad.reshape(tensor.shape).astype(tensor.dtype)
        result[tensor] = tensor.grad
    return result