"""Minimal numeric engine: tensors, tape-based autodiff and Adam"""
from .tensor import ComputationTape, Tensor, active_tape, backward
from .ops import (
    LossValue, affine, bce_loss, conv3d, conv_output_extent, global_avg_pool,
    maxpool3d, pointwise, reduce_mean, reduce_sum, relu, reshape, sigmoid,
)
from .optim import AdamState, adam_step

__all__ = [
    'Tensor', 'ComputationTape', 'active_tape', 'backward',
    'LossValue', 'affine', 'bce_loss', 'conv3d', 'conv_output_extent', 'global_avg_pool',
    'maxpool3d', 'pointwise', 'reduce_mean', 'reduce_sum', 'relu', 'reshape', 'sigmoid',
    'AdamState', 'adam_step',
]
