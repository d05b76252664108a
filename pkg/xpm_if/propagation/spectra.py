"""Per-tone amplitude spectra and the per-span IF stack.

Convention: a spectrum holds |DFT(x)| / n_samples for every FFT bin, so a real
tone m*cos(2 pi f0 t) reads m/2 at +-f0 and the squared values sum to the
variance of x (Parseval). Intensity and phase spectra share this convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, List, Literal, Optional, Sequence, Tuple

import numpy as np
from scipy import fft as sfft

from ..errors import ParameterError
from ..signal.field import SampledField

__all__ = [
    "Spectrum",
    "IfStack",
    "amplitude_spectrum",
    "intensity_fluctuation_spectrum",
    "ensemble_rms",
    "band_average",
    "spectral_deviation_db",
    "amplitude_statistics",
]

Provenance = Literal["analytic", "measured", "simulated"]

_OCCUPIED_FRACTION = 1e-6


@dataclass(frozen=True)
class Spectrum:
    values: np.ndarray
    freqs: np.ndarray
    provenance: Provenance = "simulated"
    label: str = ""

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        f = np.asarray(self.freqs, dtype=np.float64)
        if v.shape != f.shape or v.ndim != 1:
            raise ParameterError("spectrum values and freqs must be 1-D arrays of equal length")
        if np.any(v < 0):
            raise ParameterError("spectrum values must be nonnegative")
        v.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "freqs", f)

    @property
    def resolution(self) -> float:
        return float(abs(self.freqs[1] - self.freqs[0])) if self.freqs.size > 1 else 0.0

    def total_power(self) -> float:
        return float(np.sum(self.values**2))

    def at(self, f_ghz: np.ndarray | float) -> np.ndarray:
        """Linear interpolation for off-grid frequencies."""
        order = np.argsort(self.freqs)
        return np.interp(f_ghz, self.freqs[order], self.values[order])

    def scaled(self, gain: float) -> "Spectrum":
        return replace(self, values=self.values * abs(gain))

    def same_grid(self, other: "Spectrum") -> bool:
        return self.freqs.shape == other.freqs.shape and np.allclose(self.freqs, other.freqs, rtol=0, atol=1e-12)


def amplitude_spectrum(x: np.ndarray, sample_rate: float, *, remove_mean: bool = True) -> Spectrum:
    arr = np.asarray(x, dtype=np.float64)
    if arr.size == 0:
        raise ParameterError("cannot take the spectrum of an empty series")
    if remove_mean:
        arr = arr - arr.mean()
    values = np.abs(sfft.fft(arr)) / arr.size
    values[0] = 0.0
    return Spectrum(values=values, freqs=sfft.fftfreq(arr.size, d=1.0 / sample_rate))


def intensity_fluctuation_spectrum(f: SampledField) -> Spectrum:
    """|P(f)| of p(t) = |E(t)|^2 with the mean removed, W per tone, DC zero."""
    return amplitude_spectrum(np.abs(f.samples) ** 2, f.sample_rate)


def ensemble_rms(spectra: Sequence[Spectrum]) -> Spectrum:
    """sqrt(E[|X(f)|^2]) over realizations, bin by bin."""
    if not spectra:
        raise ParameterError("need at least one realization")
    first = spectra[0]
    for s in spectra[1:]:
        if not first.same_grid(s):
            raise ParameterError("realization spectra are on different grids")
    power = np.mean([s.values**2 for s in spectra], axis=0)
    return Spectrum(values=np.sqrt(power), freqs=first.freqs, provenance=first.provenance, label=first.label)


@dataclass(frozen=True)
class IfStack:
    """Pump IF amplitude spectra at the input of spans 1..N on one shared grid."""

    per_span: Tuple[Spectrum, ...]
    realizations: int = 1
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        spans = tuple(self.per_span)
        if not spans:
            raise ParameterError("an IF stack needs at least one span")
        for s in spans[1:]:
            if not spans[0].same_grid(s):
                raise ParameterError("all IF spectra must share one frequency grid")
        for s in spans:
            if s.values[np.argmin(np.abs(s.freqs))] != 0.0:
                raise ParameterError("IF spectra must have a zero DC bin")
        object.__setattr__(self, "per_span", spans)

    def __len__(self) -> int:
        return len(self.per_span)

    @property
    def freqs(self) -> np.ndarray:
        return self.per_span[0].freqs

    def amplitudes(self, spans: Optional[int] = None) -> np.ndarray:
        """(spans, bins) array of |P_p^(k)(f)|."""
        n = len(self) if spans is None else int(spans)
        if n > len(self):
            raise ParameterError(f"IF stack holds {len(self)} spans, {n} requested")
        return np.vstack([s.values for s in self.per_span[:n]])

    def constant(self) -> "IfStack":
        """Every span replaced by the transmitter spectrum."""
        return replace(self, per_span=tuple(self.per_span[0] for _ in self.per_span))

    def scaled(self, gain: float) -> "IfStack":
        return replace(self, per_span=tuple(s.scaled(gain) for s in self.per_span))

    def truncated(self, spans: int) -> "IfStack":
        return replace(self, per_span=self.per_span[: int(spans)])

    @classmethod
    def from_realizations(
        cls, realizations: Sequence[Sequence[Spectrum]], *, single_shot: bool = False
    ) -> "IfStack":
        """Ensemble-average per-span spectra from several realizations.

        `realizations[r][k]` is span k of realization r. With `single_shot` only the
        first realization is used.
        """
        if not realizations:
            raise ParameterError("need at least one realization")
        used = realizations[:1] if single_shot else realizations
        spans = len(used[0])
        if any(len(r) != spans for r in used):
            raise ParameterError("realizations tapped different span counts")
        per_span = tuple(ensemble_rms([r[k] for r in used]) for k in range(spans))
        return cls(per_span=per_span, realizations=len(used), metadata={"single_shot": bool(single_shot)})


def band_average(spectrum: Spectrum, band_ghz: float) -> Spectrum:
    """Power-average positive-frequency bins into `band_ghz` wide bands.

    Only the positive half is returned; bands start just above DC.
    """
    if band_ghz <= 0:
        raise ParameterError("band width must be > 0 GHz")
    pos = spectrum.freqs > 0
    f = spectrum.freqs[pos]
    p = spectrum.values[pos] ** 2
    idx = np.floor(f / band_ghz).astype(np.int64)
    counts = np.bincount(idx)
    keep = counts > 0
    mean_p = np.bincount(idx, weights=p)[keep] / counts[keep]
    mean_f = np.bincount(idx, weights=f)[keep] / counts[keep]
    return Spectrum(values=np.sqrt(mean_p), freqs=mean_f, provenance=spectrum.provenance, label=spectrum.label)


def spectral_deviation_db(
    a: Spectrum, b: Spectrum, f_lo: float, f_hi: float, band_ghz: float = 0.25
) -> float:
    """Mean |20 log10(a / b)| over bands centred in [f_lo, f_hi]."""
    if not a.same_grid(b):
        raise ParameterError("spectra are on different grids")
    ba = band_average(a, band_ghz)
    bb = band_average(b, band_ghz)
    mask = (ba.freqs >= f_lo) & (ba.freqs <= f_hi) & (ba.values > 0) & (bb.values > 0)
    if not np.any(mask):
        raise ParameterError(f"no populated bands between {f_lo} and {f_hi} GHz")
    return float(np.mean(np.abs(20.0 * np.log10(ba.values[mask] / bb.values[mask]))))


def amplitude_statistics(realizations: Iterable[Spectrum]) -> float:
    """E[a] / sqrt(E[a^2]) across realizations, averaged over non-DC bins.

    Rayleigh-distributed amplitudes give sqrt(pi / 4) ~ 0.886.
    """
    spectra: List[Spectrum] = list(realizations)
    if len(spectra) < 2:
        raise ParameterError("amplitude statistics need at least two realizations")
    a = np.vstack([s.values for s in spectra])
    rms_a = np.sqrt((a**2).mean(axis=0))
    peak = float(rms_a.max())
    if peak == 0:
        raise ParameterError("all realizations have an empty spectrum")
    # Bins at round-off level outside the occupied band are left out.
    occupied = rms_a > _OCCUPIED_FRACTION * peak
    return float(np.mean(a[:, occupied].mean(axis=0) / rms_a[occupied]))
