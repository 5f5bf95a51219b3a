"""LSNW network checkpoint files.

Layout (little-endian): magic ``LSNW``, version u16, config length u32,
config JSON (utf-8), parameter count u32, then per parameter in ledger
order: rank u8, extents u32 x rank, values f32.

Values are always stored at 32-bit, so a float64 network is rounded on save.
"""
import struct
from pathlib import Path
from typing import List, Union

import numpy as np
from pydantic import ValidationError

from ..exceptions import CheckpointError
from ..tensor import Tensor
from .network import Network, NetworkConfig

MAGIC = b"LSNW"
VERSION = 1


def save_checkpoint(net: Network, path: Union[str, Path]) -> Path:
    path = Path(path)
    config_bytes = net.config.model_dump_json().encode("utf-8")
    chunks = [MAGIC, struct.pack("<HI", VERSION, len(config_bytes)), config_bytes]
    chunks.append(struct.pack("<I", len(net.parameters)))
    for param in net.parameters:
        chunks.append(struct.pack("<B", param.data.ndim))
        chunks.append(struct.pack(f"<{param.data.ndim}I", *param.shape))
        chunks.append(np.ascontiguousarray(param.data, dtype="<f4").tobytes())
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(b"".join(chunks))
    except OSError as e:
        raise CheckpointError(f"cannot write checkpoint {path}: {e}") from e
    return path


class _Reader:
    def __init__(self, payload: bytes, path: Path):
        self.payload = payload
        self.offset = 0
        self.path = path

    def take(self, count: int) -> bytes:
        end = self.offset + count
        if end > len(self.payload):
            raise CheckpointError(
                f"{self.path}: truncated checkpoint, expected at least {end} bytes, got {len(self.payload)}"
            )
        chunk = self.payload[self.offset:end]
        self.offset = end
        return chunk

    def unpack(self, fmt: str) -> tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def load_checkpoint(path: Union[str, Path]) -> Network:
    """Read a checkpoint and validate parameter shapes against its config"""
    path = Path(path)
    try:
        payload = path.read_bytes()
    except OSError as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}") from e
    reader = _Reader(payload, path)
    if reader.take(4) != MAGIC:
        raise CheckpointError(f"{path}: not an LSNW checkpoint")
    version, config_length = reader.unpack("<HI")
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
    try:
        config = NetworkConfig.model_validate_json(reader.take(config_length))
    except ValidationError as e:
        raise CheckpointError(f"{path}: invalid network config: {e}") from e

    (count,) = reader.unpack("<I")
    expected = config.parameter_shapes()
    if count != len(expected):
        raise CheckpointError(f"{path}: {count} parameter tensors, config needs {len(expected)}")
    parameters: List[Tensor] = []
    for name, shape in expected:
        (rank,) = reader.unpack("<B")
        extents = reader.unpack(f"<{rank}I")
        if tuple(extents) != shape:
            raise CheckpointError(f"{path}: parameter {name} has shape {tuple(extents)}, config needs {shape}")
        values = np.frombuffer(reader.take(4 * int(np.prod(extents))), dtype="<f4").reshape(extents)
        parameters.append(Tensor(values, requires_grad=True, name=name, dtype=config.dtype))
    if reader.offset != len(payload):
        raise CheckpointError(f"{path}: {len(payload) - reader.offset} trailing bytes")
    return Network(config, parameters)
