from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Dict, Sequence

import numpy as np
from scipy import fft as sfft

from ..errors import ParameterError, SpectralOverlapError

__all__ = [
    "SampledField",
    "is_power_of_two",
    "snap_offset",
    "shift_reference",
    "set_launch_power",
    "multiplex",
    "cw_probe",
]

# Bins below this fraction of a field's strongest bin do not count as occupied.
_SUPPORT_THRESHOLD = 1e-12


def is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True, slots=True)
class SampledField:
    """Complex baseband envelope (sqrt(W) units) on a periodic time grid.

    `center_frequency_offset` is the frequency, relative to the simulation band
    centre, that the envelope is referenced to: a tone at that frequency shows
    up as a constant in `samples`.
    """

    samples: np.ndarray
    sample_rate: float
    center_frequency_offset: float = 0.0
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        arr = np.asarray(self.samples, dtype=np.complex128)
        if arr.ndim != 1:
            raise ParameterError("field samples must be one-dimensional")
        if not is_power_of_two(arr.size):
            raise ParameterError(f"field length must be a power of two, got {arr.size}")
        if self.sample_rate <= 0:
            raise ParameterError(f"sample_rate must be > 0 GHz, got {self.sample_rate}")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @property
    def n_samples(self) -> int:
        return int(self.samples.size)

    @property
    def frequency_resolution(self) -> float:
        return self.sample_rate / self.n_samples

    @property
    def duration_ns(self) -> float:
        return self.n_samples / self.sample_rate

    def time_axis(self) -> np.ndarray:
        return np.arange(self.n_samples) / self.sample_rate

    def frequency_axis(self) -> np.ndarray:
        """Baseband frequency of every FFT bin, GHz, in FFT order."""
        return sfft.fftfreq(self.n_samples, d=1.0 / self.sample_rate)

    def spectrum(self) -> np.ndarray:
        return sfft.fft(self.samples)

    def mean_power(self) -> float:
        return float(np.mean(np.abs(self.samples) ** 2))

    def energy(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2))

    def with_samples(self, samples: np.ndarray, **metadata: Any) -> "SampledField":
        meta = dict(self.metadata)
        meta.update(metadata)
        return replace(self, samples=samples, metadata=meta)


def snap_offset(offset_ghz: float, sample_rate: float, n_samples: int) -> int:
    """Nearest whole-bin shift for a frequency offset."""
    return int(round(offset_ghz * n_samples / sample_rate))


def _roll_bins(samples: np.ndarray, bins: int) -> np.ndarray:
    if bins == 0:
        return np.array(samples, dtype=np.complex128)
    return sfft.ifft(np.roll(sfft.fft(samples), bins))


def shift_reference(f: SampledField, new_reference: float) -> SampledField:
    """Re-reference the envelope to `new_reference` GHz (whole-bin rotation)."""
    bins = snap_offset(f.center_frequency_offset - new_reference, f.sample_rate, f.n_samples)
    actual = f.center_frequency_offset - bins * f.frequency_resolution
    return replace(f, samples=_roll_bins(f.samples, bins), center_frequency_offset=actual)


def set_launch_power(f: SampledField, power: float) -> SampledField:
    """Scale `f` so its measured mean power is exactly `power` W."""
    if power < 0:
        raise ParameterError(f"launch power must be >= 0 W, got {power}")
    current = f.mean_power()
    if current <= 0:
        raise ParameterError("cannot set the launch power of an all-zero field")
    return f.with_samples(f.samples * np.sqrt(power / current), launch_power=float(power))


def _support(spec: np.ndarray) -> np.ndarray:
    p = np.abs(spec) ** 2
    peak = float(p.max()) if p.size else 0.0
    if peak <= 0:
        return np.zeros(p.shape, dtype=bool)
    return p > _SUPPORT_THRESHOLD * peak


def multiplex(fields: Sequence[SampledField], *, description: str = "multiplex") -> SampledField:
    """Sum fields, each moved from its own reference to the band centre."""
    if not fields:
        raise ParameterError("multiplex needs at least one field")
    rate = fields[0].sample_rate
    n = fields[0].n_samples
    for f in fields[1:]:
        if f.sample_rate != rate or f.n_samples != n:
            raise ParameterError("all multiplexed fields must share sample_rate and length")

    total = np.zeros(n, dtype=np.complex128)
    occupied = np.zeros(n, dtype=bool)
    parts = []
    for idx, f in enumerate(fields):
        bins = snap_offset(f.center_frequency_offset, rate, n)
        spec = np.roll(sfft.fft(f.samples), bins)
        support = _support(spec)
        if np.any(occupied & support):
            raise SpectralOverlapError(f"field {idx} overlaps the spectrum of an earlier field")
        occupied |= support
        total += spec
        parts.append(f.metadata.get("description", f"field{idx}"))

    meta = {"description": description, "parts": parts}
    return SampledField(samples=sfft.ifft(total), sample_rate=rate, center_frequency_offset=0.0, metadata=meta)


def cw_probe(power: float, n_samples: int, sample_rate: float, center_offset: float = 0.0) -> SampledField:
    """Constant envelope sqrt(power), zero phase, referenced to its own frequency."""
    if power <= 0:
        raise ParameterError(f"probe power must be > 0 W, got {power}")
    samples = np.full(int(n_samples), np.sqrt(power), dtype=np.complex128)
    return SampledField(
        samples=samples,
        sample_rate=sample_rate,
        center_frequency_offset=center_offset,
        metadata={"description": "cw probe", "launch_power": float(power)},
    )
