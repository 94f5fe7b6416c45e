"""Versioned binary container for persisted artifacts.

Layout (all integers little-endian):

    magic (4 bytes) | version u16 | meta_len u32 | meta JSON (UTF-8)
    | tensor data (float32, row-major, in meta-declared order) | crc32 u32

The CRC covers every byte before it. Tensor names and shapes live in the
metadata under the reserved key "_tensors", so readers can reconstruct
arrays without trusting the byte stream's length alone.
"""

from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

import numpy as np

from sqac.errors import ContainerChecksumError, ContainerError, ContainerVersionError

_HEADER = struct.Struct("<4sHI")
_CRC = struct.Struct("<I")
_TENSOR_KEY = "_tensors"


def write_container(
    path: str | Path,
    magic: bytes,
    version: int,
    meta: dict,
    tensors: dict[str, np.ndarray],
) -> None:
    """Write an artifact container; tensor values are stored as float32."""
    if len(magic) != 4:
        raise ValueError("magic must be exactly 4 bytes")
    if _TENSOR_KEY in meta:
        raise ValueError(f"meta key {_TENSOR_KEY!r} is reserved")
    full_meta = dict(meta)
    full_meta[_TENSOR_KEY] = [
        {"name": name, "shape": list(arr.shape)} for name, arr in tensors.items()
    ]
    meta_bytes = json.dumps(full_meta, ensure_ascii=False, separators=(",", ":")).encode("utf-8")
    blob = bytearray()
    blob += _HEADER.pack(magic, version, len(meta_bytes))
    blob += meta_bytes
    for arr in tensors.values():
        blob += np.ascontiguousarray(arr, dtype="<f4").tobytes()
    crc = zlib.crc32(blob) & 0xFFFFFFFF
    blob += _CRC.pack(crc)
    Path(path).write_bytes(bytes(blob))


def read_container(
    path: str | Path, magic: bytes, max_version: int
) -> tuple[int, dict, dict[str, np.ndarray]]:
    """Read and verify a container; returns (version, meta, tensors as float64)."""
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise ContainerError(f"cannot read artifact {path}: {exc}") from exc
    if len(blob) < _HEADER.size + _CRC.size:
        raise ContainerError(f"artifact {path} too short to be a container")
    got_magic, version, meta_len = _HEADER.unpack_from(blob, 0)
    if got_magic != magic:
        raise ContainerError(
            f"artifact {path} has magic {got_magic!r}, expected {magic!r}"
        )
    if version > max_version:
        raise ContainerVersionError(
            f"artifact {path} is format version {version}; this build reads <= {max_version}"
        )
    body, crc_bytes = blob[:-_CRC.size], blob[-_CRC.size:]
    (stored_crc,) = _CRC.unpack(crc_bytes)
    if zlib.crc32(body) & 0xFFFFFFFF != stored_crc:
        raise ContainerChecksumError(f"artifact {path} fails its CRC32 check")
    offset = _HEADER.size
    if offset + meta_len > len(body):
        raise ContainerError(f"artifact {path} metadata overruns the file")
    try:
        meta = json.loads(body[offset : offset + meta_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ContainerError(f"artifact {path} metadata is not valid JSON: {exc}") from exc
    offset += meta_len
    specs = meta.pop(_TENSOR_KEY, [])
    tensors: dict[str, np.ndarray] = {}
    for spec in specs:
        shape = tuple(int(d) for d in spec["shape"])
        nbytes = int(np.prod(shape)) * 4 if shape else 4
        raw = body[offset : offset + nbytes]
        if len(raw) != nbytes:
            raise ContainerError(
                f"artifact {path} tensor {spec['name']!r} truncated "
                f"({len(raw)} of {nbytes} bytes)"
            )
        tensors[spec["name"]] = (
            np.frombuffer(raw, dtype="<f4").reshape(shape).astype(np.float64)
        )
        offset += nbytes
    if offset != len(body):
        raise ContainerError(f"artifact {path} has {len(body) - offset} trailing bytes")
    return version, meta, tensors
