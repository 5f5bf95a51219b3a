"""The 8-learned-layer 3D-CNN landslide classifier.

Input layout is [batch, band, time, height, width]: band mixing happens in
the channel contraction and the first convolution consumes the time axis.
"""
import math
from typing import TYPE_CHECKING, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, model_validator

from ..exceptions import ConfigurationError, ShapeError
from ..models import Prediction
from ..tensor import Tensor, affine, conv3d, conv_output_extent, global_avg_pool, maxpool3d, relu, reshape, sigmoid

if TYPE_CHECKING:
    from ..data.pairs import TilePair

LEARNED_LAYERS = 8

Triple = Tuple[int, int, int]


class ConvLayerSpec(BaseModel):
    """One convolutional layer, its activation (relu) and optional max-pool"""
    out_channels: int = Field(gt=0)
    kernel: Triple = Field(default=(1, 3, 3))
    stride: Triple = Field(default=(1, 1, 1))
    padding: Triple = Field(default=(0, 1, 1))
    pool: Optional[Triple] = Field(default=(1, 2, 2), description="Max-pool window (stride equals window)")


class DenseLayerSpec(BaseModel):
    """One fully connected layer"""
    out_features: int = Field(gt=0)


def _default_conv_layers() -> List[ConvLayerSpec]:
    return [
        ConvLayerSpec(out_channels=16, kernel=(2, 3, 3)),
        ConvLayerSpec(out_channels=32),
        ConvLayerSpec(out_channels=64),
        ConvLayerSpec(out_channels=64),
        ConvLayerSpec(out_channels=128, pool=None),
    ]


def _default_dense_layers() -> List[DenseLayerSpec]:
    return [DenseLayerSpec(out_features=64), DenseLayerSpec(out_features=16), DenseLayerSpec(out_features=1)]


class NetworkConfig(BaseModel):
    """Architecture ledger: convolutions, global average pool, dense head"""
    tile_size: int = Field(default=512, gt=0, description="Pixels per tile side")
    input_bands: int = Field(default=5, gt=0)
    time_steps: int = Field(default=2, gt=0)
    conv_layers: List[ConvLayerSpec] = Field(default_factory=_default_conv_layers)
    dense_layers: List[DenseLayerSpec] = Field(default_factory=_default_dense_layers)
    init_seed: int = Field(default=0, ge=0)
    dtype: Literal["float32", "float64"] = "float32"

    @model_validator(mode="after")
    def _check_ledger(self) -> "NetworkConfig":
        learned = len(self.conv_layers) + len(self.dense_layers)
        if learned != LEARNED_LAYERS:
            raise ValueError(f"network must have exactly {LEARNED_LAYERS} learned layers, got {learned}")
        if not self.conv_layers or not self.dense_layers:
            raise ValueError("network needs at least one convolutional and one dense layer")
        if self.conv_layers[0].kernel[0] != self.time_steps:
            raise ValueError(
                f"first convolution depth extent {self.conv_layers[0].kernel[0]} "
                f"must equal time_steps {self.time_steps}"
            )
        if self.dense_layers[-1].out_features != 1:
            raise ValueError("final layer must output a single logit")
        return self

    @classmethod
    def desk_scale(cls, **overrides) -> "NetworkConfig":
        """Default ledger at 64-pixel tiles"""
        return cls(**{"tile_size": 64, **overrides})

    @classmethod
    def tiny(cls, tile_size: int = 8, input_bands: int = 2, **overrides) -> "NetworkConfig":
        """Proportionally shrunk ledger for gradient checks on small tiles"""
        conv = [
            ConvLayerSpec(out_channels=3, kernel=(2, 3, 3)),
            ConvLayerSpec(out_channels=4),
            ConvLayerSpec(out_channels=4),
            ConvLayerSpec(out_channels=5, pool=None),
            ConvLayerSpec(out_channels=6, pool=None),
        ]
        dense = [DenseLayerSpec(out_features=5), DenseLayerSpec(out_features=3), DenseLayerSpec(out_features=1)]
        return cls(**{
            "tile_size": tile_size, "input_bands": input_bands,
            "conv_layers": conv, "dense_layers": dense, **overrides,
        })

    @property
    def pooling_factor(self) -> int:
        factor = 1
        for layer in self.conv_layers:
            factor *= layer.stride[1]
            if layer.pool is not None:
                factor *= layer.pool[1]
        return factor

    def input_shape(self, batch: int) -> Tuple[int, int, int, int, int]:
        return (batch, self.input_bands, self.time_steps, self.tile_size, self.tile_size)

    def layer_shapes(self) -> List[Tuple[str, Tuple[int, ...]]]:
        """Per-layer output shapes for one example, derived from config alone"""
        shapes: List[Tuple[str, Tuple[int, ...]]] = []
        channels = self.input_bands
        extents = [self.time_steps, self.tile_size, self.tile_size]
        for index, layer in enumerate(self.conv_layers, start=1):
            extents = [
                conv_output_extent(e, k, s, p)
                for e, k, s, p in zip(extents, layer.kernel, layer.stride, layer.padding)
            ]
            channels = layer.out_channels
            if min(extents) <= 0:
                raise ConfigurationError(f"conv{index} output collapses to {extents}")
            shapes.append((f"conv{index}", (channels, *extents)))
            if layer.pool is not None:
                if any(w > e for w, e in zip(layer.pool, extents)):
                    raise ConfigurationError(f"pool{index} window {layer.pool} exceeds extents {extents}")
                extents = [(e - w) // w + 1 for e, w in zip(extents, layer.pool)]
                shapes.append((f"pool{index}", (channels, *extents)))
        shapes.append(("global_pool", (channels,)))
        features = channels
        for index, layer in enumerate(self.dense_layers, start=len(self.conv_layers) + 1):
            features = layer.out_features
            shapes.append((f"dense{index}", (features,)))
        return shapes

    def parameter_shapes(self) -> List[Tuple[str, Tuple[int, ...]]]:
        shapes: List[Tuple[str, Tuple[int, ...]]] = []
        channels = self.input_bands
        for index, layer in enumerate(self.conv_layers, start=1):
            shapes.append((f"conv{index}.weight", (layer.out_channels, channels, *layer.kernel)))
            shapes.append((f"conv{index}.bias", (layer.out_channels,)))
            channels = layer.out_channels
        features = channels
        for index, layer in enumerate(self.dense_layers, start=len(self.conv_layers) + 1):
            shapes.append((f"dense{index}.weight", (features, layer.out_features)))
            shapes.append((f"dense{index}.bias", (layer.out_features,)))
            features = layer.out_features
        return shapes


class Network:
    """Parameter tensors in ledger order plus the forward pass"""

    def __init__(self, config: NetworkConfig, parameters: List[Tensor]):
        expected = config.parameter_shapes()
        if len(parameters) != len(expected):
            raise ShapeError(f"network expects {len(expected)} parameter tensors, got {len(parameters)}")
        for (name, shape), param in zip(expected, parameters):
            if param.shape != shape:
                raise ShapeError(f"parameter {name}: expected shape {shape}, got {param.shape}")
            param.name = name
            param.requires_grad = True
        self.config = config
        self.parameters = parameters

    @property
    def parameter_count(self) -> int:
        return sum(p.size for p in self.parameters)

    @property
    def learned_layer_count(self) -> int:
        return len(self.parameters) // 2

    def parameter(self, name: str) -> Tensor:
        for param in self.parameters:
            if param.name == name:
                return param
        raise KeyError(name)

    def all_finite(self) -> bool:
        return all(bool(np.all(np.isfinite(p.data))) for p in self.parameters)

    def forward(self, batch: Union[Tensor, np.ndarray], trace: Optional[List[Tuple[str, Tuple[int, ...]]]] = None) -> Tensor:
        """Probabilities of shape [N] for a [N, bands, time, T, T] batch"""
        x = batch if isinstance(batch, Tensor) else Tensor(batch, dtype=self.config.dtype)
        if x.data.ndim != 5 or x.shape[1:] != self.config.input_shape(1)[1:]:
            expected = ("N",) + self.config.input_shape(1)[1:]
            raise ShapeError(f"forward batch: expected shape {expected}, got {x.shape}")
        if x.dtype != np.dtype(self.config.dtype):
            x = Tensor(x.data, dtype=self.config.dtype)

        params = iter(self.parameters)
        for index, layer in enumerate(self.config.conv_layers, start=1):
            weight, bias = next(params), next(params)
            x = relu(conv3d(x, weight, bias, stride=layer.stride, padding=layer.padding))
            if trace is not None:
                trace.append((f"conv{index}", x.shape[1:]))
            if layer.pool is not None:
                x = maxpool3d(x, layer.pool)
                if trace is not None:
                    trace.append((f"pool{index}", x.shape[1:]))
        x = global_avg_pool(x)
        if trace is not None:
            trace.append(("global_pool", x.shape[1:]))
        dense_count = len(self.config.dense_layers)
        for offset in range(dense_count):
            weight, bias = next(params), next(params)
            x = affine(x, weight, bias)
            if offset < dense_count - 1:
                x = relu(x)
            if trace is not None:
                trace.append((f"dense{len(self.config.conv_layers) + offset + 1}", x.shape[1:]))
        return sigmoid(reshape(x, (x.shape[0],)))

    def predict(self, pair: "TilePair", threshold: float = 0.5) -> Prediction:
        if pair.tile_size != self.config.tile_size:
            raise ShapeError(f"tile pair size {pair.tile_size} does not match network tile {self.config.tile_size}")
        probability = float(self.forward(pair.to_input()[None]).data[0])
        return Prediction(probability=probability, threshold=threshold)


def build_network(config: NetworkConfig) -> Network:
    """Scaled-normal (std sqrt(2/fan_in)) weights from config.init_seed, zero biases"""
    factor = config.pooling_factor
    if config.tile_size % factor != 0:
        raise ConfigurationError(
            f"tile_size {config.tile_size} is not divisible by the cumulative pooling factor {factor}"
        )
    config.layer_shapes()
    rng = np.random.default_rng(config.init_seed)
    parameters: List[Tensor] = []
    for name, shape in config.parameter_shapes():
        if name.endswith(".weight"):
            fan_in = math.prod(shape[1:]) if name.startswith("conv") else shape[0]
            values = rng.standard_normal(shape) * math.sqrt(2.0 / fan_in)
        else:
            values = np.zeros(shape)
        parameters.append(Tensor(values, requires_grad=True, name=name, dtype=config.dtype))
    return Network(config, parameters)


def forward(net: Network, batch: Union[Tensor, np.ndarray]) -> Tensor:
    return net.forward(batch)


def predict(net: Network, pair: "TilePair", threshold: float = 0.5) -> Prediction:
    return net.predict(pair, threshold=threshold)
