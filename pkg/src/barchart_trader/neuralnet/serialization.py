"""Model file format (version 1).

Layout, all integers little-endian::

    magic      8 bytes   b"BCHTCNN\\x00"
    version    uint32    1
    hdr_len    uint32    length of the JSON header in bytes
    header     hdr_len   UTF-8 JSON, keys sorted:
                         {"architecture": {...}, "config": {...},
                          "arrays": [[name, [dims...]], ...]}
    payload              float64 little-endian arrays, in header order,
                         row-major, no padding

The file must end exactly after the last array. Output is a pure function
of the model, so identical models give identical bytes.
"""
from __future__ import annotations

import json
import struct
from dataclasses import asdict
from typing import Optional

import numpy as np

from ..errors import ModelFormatError
from .model import PARAM_NAMES, Architecture, CnnModel, ModelConfig, from_params

MAGIC = b"BCHTCNN\x00"
VERSION = 1
_PREFIX = struct.Struct("<8sII")


def save_model(model: CnnModel) -> bytes:
    params = model.params()
    header = {
        "architecture": asdict(model.architecture),
        "config": model.config.to_dict(),
        "arrays": [[name, list(params[name].shape)] for name in PARAM_NAMES],
    }
    hdr = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    chunks = [_PREFIX.pack(MAGIC, VERSION, len(hdr)), hdr]
    chunks += [np.ascontiguousarray(params[name], dtype="<f8").tobytes() for name in PARAM_NAMES]
    return b"".join(chunks)


def load_model(data: bytes, expected: Optional[Architecture] = None) -> CnnModel:
    """Parse a model file; ``expected`` rejects any other architecture."""
    if len(data) < _PREFIX.size:
        raise ModelFormatError("model file truncated before header")
    magic, version, hdr_len = _PREFIX.unpack_from(data)
    if magic != MAGIC:
        raise ModelFormatError("not a model file (bad magic)")
    if version != VERSION:
        raise ModelFormatError(f"unsupported model file version {version}")
    start = _PREFIX.size
    if len(data) < start + hdr_len:
        raise ModelFormatError("model file truncated inside header")
    try:
        header = json.loads(data[start : start + hdr_len].decode("utf-8"))
        arch = Architecture(**header["architecture"])
        config = ModelConfig.from_dict(header["config"])
        arrays = [(name, tuple(shape)) for name, shape in header["arrays"]]
    except (ValueError, KeyError, TypeError) as exc:
        raise ModelFormatError(f"corrupt model header: {exc}") from None
    if config.architecture != arch:
        raise ModelFormatError("architecture descriptor disagrees with config")
    if expected is not None and arch != expected:
        raise ModelFormatError(f"model architecture {arch} does not match expected {expected}")
    shapes = arch.param_shapes()
    if [n for n, _ in arrays] != list(PARAM_NAMES) or any(shapes[n] != s for n, s in arrays):
        raise ModelFormatError("array table does not match the architecture")

    offset = start + hdr_len
    params = {}
    for name, shape in arrays:
        count = int(np.prod(shape))
        end = offset + 8 * count
        if end > len(data):
            raise ModelFormatError(f"model file truncated in array {name}")
        params[name] = np.frombuffer(data, dtype="<f8", count=count, offset=offset).astype(np.float64).reshape(shape)
        offset = end
    if offset != len(data):
        raise ModelFormatError(f"{len(data) - offset} unexpected trailing bytes")
    return from_params(config, params)


def write_model(model: CnnModel, path) -> None:
    with open(path, "wb") as fh:
        fh.write(save_model(model))


def read_model(path, expected: Optional[Architecture] = None) -> CnnModel:
    with open(path, "rb") as fh:
        return load_model(fh.read(), expected)
