from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import NonFiniteError, ShapeError
from .tensor import Tensor


@dataclass
class AdamState:
    """Moment estimates and hyperparameters of the Adam update"""
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step_count: int = 0
    first_moment: List[np.ndarray] = field(default_factory=list)
    second_moment: List[np.ndarray] = field(default_factory=list)

    @classmethod
    def for_parameters(cls, params: Sequence[Tensor], **hyperparameters: float) -> "AdamState":
        """Create a fresh state with zero moments for each parameter"""
        state = cls(**hyperparameters)
        state.first_moment = [np.zeros(p.shape, dtype=np.float64) for p in params]
        state.second_moment = [np.zeros(p.shape, dtype=np.float64) for p in params]
        return state


def _param_name(param: Tensor, index: int) -> str:
    return param.name or f"param[{index}]"


def adam_step(
    params: Sequence[Tensor],
    grads: Optional[Sequence[np.ndarray]],
    state: AdamState,
) -> Tuple[Sequence[Tensor], AdamState]:
    """One bias-corrected Adam update, in place.

    ``grads`` defaults to each parameter's ``.grad``. Every gradient is
    checked before any parameter moves.
    """
    if grads is None:
        grads = [p.grad if p.grad is not None else np.zeros(p.shape) for p in params]
    if len(grads) != len(params):
        raise ShapeError(f"adam_step got {len(grads)} gradients for {len(params)} parameters")
    if state.step_count < 0:
        raise ValueError("adam step_count must be non-negative")
    if not state.first_moment:
        state.first_moment = [np.zeros(p.shape, dtype=np.float64) for p in params]
        state.second_moment = [np.zeros(p.shape, dtype=np.float64) for p in params]

    checked = []
    for index, (param, grad, m) in enumerate(zip(params, grads, state.first_moment)):
        grad = np.asarray(grad, dtype=np.float64)
        if grad.shape != param.shape or m.shape != param.shape:
            raise ShapeError(
                f"adam_step shape mismatch for {_param_name(param, index)}: "
                f"param {param.shape}, grad {grad.shape}, moment {m.shape}"
            )
        if not np.all(np.isfinite(grad)):
            raise NonFiniteError(_param_name(param, index))
        checked.append(grad)

    state.step_count += 1
    t = state.step_count
    correction1 = 1.0 - state.beta1 ** t
    correction2 = 1.0 - state.beta2 ** t
    for param, grad, m, v in zip(params, checked, state.first_moment, state.second_moment):
        m *= state.beta1
        m += (1.0 - state.beta1) * grad
        v *= state.beta2
        v += (1.0 - state.beta2) * (grad * grad)
        m_hat = m / correction1
        v_hat = v / correction2
        update = state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon)
        param.data = (param.data.astype(np.float64) - update).astype(param.dtype)
    return params, state
