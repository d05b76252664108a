from __future__ import annotations

import struct

from ..errors import CacheFormatError


def _need(raw: bytes, offset: int, size: int) -> None:
    if offset < 0 or offset + size > len(raw):
        raise CacheFormatError(f"truncated container: need {size} bytes at offset {offset}, have {len(raw)}")


def u16le_from(raw: bytes, offset: int) -> int:
    _need(raw, offset, 2)
    return raw[offset] | (raw[offset + 1] << 8)


def u32le_from(raw: bytes, offset: int) -> int:
    _need(raw, offset, 4)
    return raw[offset] | (raw[offset + 1] << 8) | (raw[offset + 2] << 16) | (raw[offset + 3] << 24)


def f64le_from(raw: bytes, offset: int) -> float:
    _need(raw, offset, 8)
    return struct.unpack_from("<d", raw, offset)[0]


def pack_u16le(val: int) -> bytes:
    return int(val).to_bytes(2, "little")


def pack_u32le(val: int) -> bytes:
    return int(val).to_bytes(4, "little")


def pack_f64le(val: float) -> bytes:
    return struct.pack("<d", float(val))
