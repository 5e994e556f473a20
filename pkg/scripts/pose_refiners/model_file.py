"""
Binary model container, all integers little-endian u32:

    b"SREF" | version | config length | canonical config JSON (utf-8)
    | parameter count | per parameter: name length, name, rank, dims..., raw <f8 data
"""
import json
import struct
from collections import OrderedDict
from pathlib import Path

import numpy as np

from pose_refiners.config import ModelConfig
from pose_refiners.refiner import RefinerModel
from utils.errors import ConfigError, ModelFileError

MAGIC = b"SREF"
FORMAT_VERSION = 1


def model_to_bytes(model: RefinerModel) -> bytes:
    config = model.config.canonical_json().encode("utf-8")
    chunks = [MAGIC, struct.pack("<II", FORMAT_VERSION, len(config)), config,
              struct.pack("<I", len(model.params))]
    for name, value in model.params.items():
        encoded = name.encode("utf-8")
        chunks.append(struct.pack("<I", len(encoded)))
        chunks.append(encoded)
        chunks.append(struct.pack(f"<I{value.ndim}I", value.ndim, *value.shape))
        chunks.append(np.ascontiguousarray(value, dtype="<f8").tobytes())
    return b"".join(chunks)


class _Reader:
    def __init__(self, blob: bytes):
        self.blob = blob
        self.offset = 0

    def take(self, size: int, what: str) -> bytes:
        if self.offset + size > len(self.blob):
            raise ModelFileError(f"model file is truncated while reading {what} (offset {self.offset})")
        chunk = self.blob[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def u32(self, what: str) -> int:
        return struct.unpack("<I", self.take(4, what))[0]


def model_from_bytes(blob: bytes) -> RefinerModel:
    reader = _Reader(blob)
    if reader.take(len(MAGIC), "magic") != MAGIC:
        raise ModelFileError("not a model file (bad magic bytes)")
    version = reader.u32("format version")
    if version != FORMAT_VERSION:
        raise ModelFileError(f"unsupported model format version {version}, expected {FORMAT_VERSION}")
    raw_config = reader.take(reader.u32("config length"), "config")
    try:
        config = ModelConfig.from_dict(json.loads(raw_config.decode("utf-8")))
    except (UnicodeDecodeError, json.JSONDecodeError, TypeError, ConfigError) as e:
        raise ModelFileError(f"corrupt model config: {e}")

    params = OrderedDict()
    for _ in range(reader.u32("parameter count")):
        name = reader.take(reader.u32("name length"), "parameter name").decode("utf-8", errors="replace")
        rank = reader.u32(f"rank of '{name}'")
        if not 1 <= rank <= 3:
            raise ModelFileError(f"parameter '{name}' has invalid rank {rank}")
        dims = tuple(reader.u32(f"dims of '{name}'") for _ in range(rank))
        size = int(np.prod(dims))
        data = np.frombuffer(reader.take(8 * size, f"data of '{name}'"), dtype="<f8")
        params[name] = data.astype(np.float64).reshape(dims)
    if reader.offset != len(blob):
        raise ModelFileError(f"model file has {len(blob) - reader.offset} unexpected trailing bytes")
    return RefinerModel(config, params)


def save_model(model: RefinerModel, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(model_to_bytes(model))
    return path


def load_model(path) -> RefinerModel:
    with open(path, "rb") as f:
        return model_from_bytes(f.read())
