"""Binary dump of per-span IF stacks and fields for reuse between CLI stages.

Layout (all little-endian):

    magic      6 bytes  b"XPMIF\\0"
    version    u16
    flags      u16      bit 0: field present
    n_samples  u32      grid size
    spans      u32
    rate       f64      sample rate, GHz
    offset     f64      field reference offset, GHz (0 without a field)
    IF values  spans * n_samples f64, FFT bin order
    field      2 * n_samples f64, interleaved re/im
"""

from __future__ import annotations

import logging
import os
from pathlib import Path
from typing import Optional, Tuple

import numpy as np
from scipy import fft as sfft

from ..errors import CacheFormatError, ParameterError
from ..signal.field import SampledField
from ..util.bytes import f64le_from, pack_f64le, pack_u16le, pack_u32le, u16le_from, u32le_from
from .spectra import IfStack, Spectrum

__all__ = ["CACHE_VERSION", "write_if_cache", "read_if_cache"]

logger = logging.getLogger(__name__)

CACHE_MAGIC = b"XPMIF\x00"
CACHE_VERSION = 1
_HEADER_SIZE = len(CACHE_MAGIC) + 2 + 2 + 4 + 4 + 8 + 8
_FLAG_FIELD = 0x1


def write_if_cache(
    path: Path,
    if_stack: IfStack,
    sample_rate: float,
    f: Optional[SampledField] = None,
) -> Path:
    n = if_stack.freqs.size
    if f is not None and (f.n_samples != n or f.sample_rate != sample_rate):
        raise ParameterError("cached field must share the IF grid")
    header = b"".join(
        [
            CACHE_MAGIC,
            pack_u16le(CACHE_VERSION),
            pack_u16le(_FLAG_FIELD if f is not None else 0),
            pack_u32le(n),
            pack_u32le(len(if_stack)),
            pack_f64le(sample_rate),
            pack_f64le(f.center_frequency_offset if f is not None else 0.0),
        ]
    )
    body = if_stack.amplitudes().astype("<f8").tobytes()
    if f is not None:
        inter = np.empty(2 * n, dtype="<f8")
        inter[0::2] = f.samples.real
        inter[1::2] = f.samples.imag
        body += inter.tobytes()

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.tmp.{os.getpid()}")
    with open(tmp, "wb") as handle:
        handle.write(header)
        handle.write(body)
    os.replace(tmp, path)
    logger.debug("wrote IF cache %s (%d spans, %d bins)", path, len(if_stack), n)
    return path


def read_if_cache(path: Path) -> Tuple[IfStack, Optional[SampledField]]:
    raw = Path(path).read_bytes()
    if raw[: len(CACHE_MAGIC)] != CACHE_MAGIC:
        raise CacheFormatError(f"{path} is not an IF cache")
    pos = len(CACHE_MAGIC)
    version = u16le_from(raw, pos)
    if version != CACHE_VERSION:
        raise CacheFormatError(f"unsupported IF cache version {version}")
    flags = u16le_from(raw, pos + 2)
    n = u32le_from(raw, pos + 4)
    spans = u32le_from(raw, pos + 8)
    rate = f64le_from(raw, pos + 12)
    offset = f64le_from(raw, pos + 20)

    expected = _HEADER_SIZE + 8 * n * spans + (16 * n if flags & _FLAG_FIELD else 0)
    if len(raw) != expected:
        raise CacheFormatError(f"{path}: expected {expected} bytes, found {len(raw)}")

    values = np.frombuffer(raw, dtype="<f8", count=n * spans, offset=_HEADER_SIZE).reshape(spans, n)
    freqs = sfft.fftfreq(n, d=1.0 / rate)
    stack = IfStack(per_span=tuple(Spectrum(values=row.astype(np.float64), freqs=freqs) for row in values))

    field = None
    if flags & _FLAG_FIELD:
        inter = np.frombuffer(raw, dtype="<f8", count=2 * n, offset=_HEADER_SIZE + 8 * n * spans)
        field = SampledField(
            samples=inter[0::2] + 1j * inter[1::2],
            sample_rate=rate,
            center_frequency_offset=offset,
            metadata={"description": "cached field"},
        )
    return stack, field
