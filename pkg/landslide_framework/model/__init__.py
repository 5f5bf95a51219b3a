"""3D-CNN landslide classifier"""
from .network import (
    ConvLayerSpec, DenseLayerSpec, Network, NetworkConfig, build_network, forward, predict,
)
from .checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    'ConvLayerSpec', 'DenseLayerSpec', 'Network', 'NetworkConfig',
    'build_network', 'forward', 'predict', 'load_checkpoint', 'save_checkpoint',
]
