"""Forward operations with their backward rules.

Contractions (conv3d, affine) accumulate in float64 and store the result
in the input's dtype.
"""
from dataclasses import dataclass
from typing import Literal, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..exceptions import LabelError, ShapeError
from .tensor import BackwardFn, Tensor, active_tape

Triple = Tuple[int, int, int]
_AXES = ("depth", "height", "width")

LOG_CLAMP = 1e-7


def _result(op: str, inputs: Sequence[Tensor], data: np.ndarray, backward_fn: BackwardFn) -> Tensor:
    out = Tensor.wrap(data)
    tape = active_tape()
    if tape is not None and any(t.requires_grad for t in inputs):
        out.requires_grad = True
        tape.record(op, inputs, out, backward_fn)
    return out


def _triple(value: Union[int, Sequence[int]], what: str) -> Triple:
    if isinstance(value, (int, np.integer)):
        return (int(value),) * 3
    values = tuple(int(v) for v in value)
    if len(values) != 3:
        raise ShapeError(f"{what} needs 3 extents (depth, height, width), got {values}")
    return values  # type: ignore[return-value]


def conv_output_extent(extent: int, kernel: int, stride: int, pad: int) -> int:
    """(E + 2*pad - k) // stride + 1"""
    return (extent + 2 * pad - kernel) // stride + 1


def _check_rank(tensor: Tensor, rank: int, what: str) -> None:
    if tensor.data.ndim != rank:
        raise ShapeError(f"{what} must have rank {rank}, got shape {tensor.shape}")


def conv3d(
    input: Tensor,
    kernel: Tensor,
    bias: Tensor,
    stride: Union[int, Sequence[int]] = 1,
    padding: Union[int, Sequence[int]] = 0,
) -> Tensor:
    """3D cross-correlation of [N,C,D,H,W] with [F,C,kd,kh,kw] plus bias"""
    _check_rank(input, 5, "conv3d input")
    _check_rank(kernel, 5, "conv3d kernel")
    stride3 = _triple(stride, "stride")
    pad3 = _triple(padding, "padding")
    n, c, *extents = input.shape
    f, kc, *kext = kernel.shape
    if kc != c:
        raise ShapeError(f"conv3d channel axis: kernel expects {kc} channels, input has {c}")
    if bias.shape != (f,):
        raise ShapeError(f"conv3d bias must have shape ({f},), got {bias.shape}")
    out_extents = []
    for axis, extent, k, s, p in zip(_AXES, extents, kext, stride3, pad3):
        if s <= 0 or p < 0:
            raise ShapeError(f"conv3d {axis} axis: stride must be positive and padding non-negative")
        if k > extent + 2 * p:
            raise ShapeError(f"conv3d {axis} axis: kernel {k} exceeds padded extent {extent + 2 * p}")
        out = conv_output_extent(extent, k, s, p)
        if out <= 0:
            raise ShapeError(f"conv3d {axis} axis: output extent is zero")
        out_extents.append(out)

    dtype = input.dtype
    pd, ph, pw = pad3
    sd, sh, sw = stride3
    kd, kh, kw = kext
    od, oh, ow = out_extents
    padded = np.pad(input.data, ((0, 0), (0, 0), (pd, pd), (ph, ph), (pw, pw)))
    windows = sliding_window_view(padded, (kd, kh, kw), axis=(2, 3, 4))[:, :, ::sd, ::sh, ::sw]
    windows64 = windows.astype(np.float64)
    kernel64 = kernel.data.astype(np.float64)
    acc = np.tensordot(windows64, kernel64, axes=([1, 5, 6, 7], [1, 2, 3, 4]))
    acc = np.moveaxis(acc, -1, 1) + bias.data.astype(np.float64)[None, :, None, None, None]

    def backward_fn(grad: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        grad_bias = grad.sum(axis=(0, 2, 3, 4))
        grad_kernel = np.tensordot(grad, windows64, axes=([0, 2, 3, 4], [0, 2, 3, 4]))
        grad_padded = np.zeros(padded.shape, dtype=np.float64)
        for a, b, e in np.ndindex(kd, kh, kw):
            contrib = np.tensordot(kernel64[:, :, a, b, e], grad, axes=([0], [1]))
            grad_padded[
                :, :,
                a:a + sd * (od - 1) + 1:sd,
                b:b + sh * (oh - 1) + 1:sh,
                e:e + sw * (ow - 1) + 1:sw,
            ] += np.moveaxis(contrib, 0, 1)
        d_end, h_end, w_end = padded.shape[2] - pd, padded.shape[3] - ph, padded.shape[4] - pw
        grad_input = grad_padded[:, :, pd:d_end, ph:h_end, pw:w_end]
        return grad_input, grad_kernel, grad_bias

    return _result("conv3d", (input, kernel, bias), acc.astype(dtype), backward_fn)


def maxpool3d(
    input: Tensor,
    window: Union[int, Sequence[int]],
    stride: Optional[Union[int, Sequence[int]]] = None,
) -> Tensor:
    """Max over each window; backward routes to the first maximal element"""
    _check_rank(input, 5, "maxpool3d input")
    window3 = _triple(window, "window")
    stride3 = _triple(stride if stride is not None else window3, "stride")
    n, c, *extents = input.shape
    out_extents = []
    for axis, extent, k, s in zip(_AXES, extents, window3, stride3):
        if s <= 0 or k <= 0:
            raise ShapeError(f"maxpool3d {axis} axis: window and stride must be positive")
        if k > extent:
            raise ShapeError(f"maxpool3d {axis} axis: window {k} exceeds extent {extent}")
        out_extents.append(conv_output_extent(extent, k, s, 0))

    sd, sh, sw = stride3
    windows = sliding_window_view(input.data, window3, axis=(2, 3, 4))[:, :, ::sd, ::sh, ::sw]
    flat = windows.reshape(windows.shape[:5] + (-1,))
    arg = np.argmax(flat, axis=-1)
    out = np.take_along_axis(flat, arg[..., None], axis=-1)[..., 0]

    def backward_fn(grad: np.ndarray) -> Tuple[np.ndarray]:
        a, b, e = np.unravel_index(arg, window3)
        ni, ci, di, hi, wi = np.indices(arg.shape)
        grad_input = np.zeros(input.shape, dtype=np.float64)
        np.add.at(grad_input, (ni, ci, di * sd + a, hi * sh + b, wi * sw + e), grad)
        return (grad_input,)

    return _result("maxpool3d", (input,), np.ascontiguousarray(out), backward_fn)


def affine(input: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """[N,K] @ [K,M] + [M]"""
    _check_rank(input, 2, "affine input")
    _check_rank(weight, 2, "affine weight")
    k, m = weight.shape
    if input.shape[1] != k:
        raise ShapeError(f"affine inner axis: input has {input.shape[1]} features, weight expects {k}")
    if bias.shape != (m,):
        raise ShapeError(f"affine bias must have shape ({m},), got {bias.shape}")
    x64 = input.data.astype(np.float64)
    w64 = weight.data.astype(np.float64)
    acc = x64 @ w64 + bias.data.astype(np.float64)

    def backward_fn(grad: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return grad @ w64.T, x64.T @ grad, grad.sum(axis=0)

    return _result("affine", (input, weight, bias), acc.astype(input.dtype), backward_fn)


def _sigmoid64(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    positive = x >= 0
    out[positive] = 1.0 / (1.0 + np.exp(-x[positive]))
    exp_x = np.exp(x[~positive])
    out[~positive] = exp_x / (1.0 + exp_x)
    return out


def pointwise(input: Tensor, kind: Literal["relu", "sigmoid"]) -> Tensor:
    x = input.data
    if kind == "relu":
        mask = x > 0
        out = np.where(mask, x, np.zeros_like(x))

        def backward_fn(grad: np.ndarray) -> Tuple[np.ndarray]:
            return (grad * mask,)

    elif kind == "sigmoid":
        finfo = np.finfo(x.dtype)
        # strictly inside (0, 1) even where the storage dtype saturates
        probs = np.clip(_sigmoid64(x.astype(np.float64)), finfo.tiny, 1.0 - finfo.epsneg)

        def backward_fn(grad: np.ndarray) -> Tuple[np.ndarray]:
            return (grad * probs * (1.0 - probs),)

        out = probs.astype(x.dtype)
    else:
        raise ValueError(f"unknown pointwise kind: {kind}")
    return _result(kind, (input,), out, backward_fn)


def relu(input: Tensor) -> Tensor:
    return pointwise(input, "relu")


def sigmoid(input: Tensor) -> Tensor:
    return pointwise(input, "sigmoid")


def global_avg_pool(input: Tensor) -> Tensor:
    """Mean over depth, height and width: [N,C,D,H,W] -> [N,C]"""
    _check_rank(input, 5, "global_avg_pool input")
    count = input.shape[2] * input.shape[3] * input.shape[4]
    out = input.data.astype(np.float64).mean(axis=(2, 3, 4))

    def backward_fn(grad: np.ndarray) -> Tuple[np.ndarray]:
        return (np.broadcast_to(grad[:, :, None, None, None] / count, input.shape),)

    return _result("global_avg_pool", (input,), out.astype(input.dtype), backward_fn)


def reshape(input: Tensor, shape: Sequence[int]) -> Tensor:
    out = input.data.reshape(tuple(shape))

    def backward_fn(grad: np.ndarray) -> Tuple[np.ndarray]:
        return (grad.reshape(input.shape),)

    return _result("reshape", (input,), out, backward_fn)


def reduce_sum(input: Tensor) -> Tensor:
    out = np.asarray(input.data.astype(np.float64).sum())

    def backward_fn(grad: np.ndarray) -> Tuple[np.ndarray]:
        return (np.broadcast_to(grad, input.shape),)

    return _result("sum", (input,), out.astype(input.dtype), backward_fn)


def reduce_mean(input: Tensor) -> Tensor:
    count = input.data.size
    out = np.asarray(input.data.astype(np.float64).mean())

    def backward_fn(grad: np.ndarray) -> Tuple[np.ndarray]:
        return (np.broadcast_to(grad / count, input.shape),)

    return _result("mean", (input,), out.astype(input.dtype), backward_fn)


@dataclass
class LossValue:
    """Scalar loss and the reduction that produced it"""
    tensor: Tensor
    reduction: Literal["sum", "mean"]

    @property
    def value(self) -> float:
        return self.tensor.item()


def bce_loss(
    pred: Tensor,
    label: Union[Tensor, np.ndarray, Sequence[float]],
    reduction: Literal["sum", "mean"] = "mean",
    clamp: float = LOG_CLAMP,
) -> LossValue:
    """Binary cross-entropy on probabilities clamped to [clamp, 1 - clamp]"""
    if reduction not in ("sum", "mean"):
        raise ValueError(f"unknown reduction: {reduction}")
    y = label.data if isinstance(label, Tensor) else np.asarray(label)
    y = y.astype(np.float64).reshape(-1) if y.ndim == 0 else y.astype(np.float64)
    if pred.shape != y.shape:
        raise ShapeError(f"bce_loss batch axis: pred shape {pred.shape} vs label shape {y.shape}")
    if not np.all((y == 0.0) | (y == 1.0)):
        raise LabelError("bce_loss labels must be 0 or 1")

    raw = pred.data.astype(np.float64)
    p = np.clip(raw, clamp, 1.0 - clamp)
    terms = -(y * np.log(p) + (1.0 - y) * np.log1p(-p))
    scale = 1.0 / y.size if reduction == "mean" else 1.0
    total = terms.sum() * scale

    def backward_fn(grad: np.ndarray) -> Tuple[np.ndarray]:
        # evaluated at the clamped p, saturated inputs included
        local = (-(y / p) + (1.0 - y) / (1.0 - p)) * scale
        return (grad * local,)

    out = _result("bce_loss", (pred,), np.asarray(total, dtype=np.float64), backward_fn)
    return LossValue(tensor=out, reduction=reduction)
