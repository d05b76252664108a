from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import signal as ssignal

from ..analytic.xpm import PhaseSpectrum
from ..errors import ParameterError
from ..propagation.spectra import amplitude_spectrum, ensemble_rms
from ..signal.field import SampledField

__all__ = [
    "PhaseSeries",
    "extract_phase",
    "phase_psd",
    "phase_variance_measured",
    "tone_amplitude",
]

logger = logging.getLogger(__name__)

# Samples weaker than this fraction of the RMS envelope carry no usable phase.
GAP_THRESHOLD = 1e-6


@dataclass(frozen=True)
class PhaseSeries:
    values: np.ndarray
    sample_rate: float
    mean_removed: bool = True
    gaps: int = 0

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise ParameterError("phase series must be a non-empty 1-D array")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n_samples(self) -> int:
        return int(self.values.size)

    def power(self) -> float:
        return float(np.mean(self.values**2))


def extract_phase(f: SampledField, *, remove_mean: bool = True) -> PhaseSeries:
    """Unwrapped arg of the envelope with the static offset removed.

    Near-zero samples are flagged as gaps and bridged by linear interpolation
    of the surrounding phase.
    """
    samples = f.samples
    mag = np.abs(samples)
    rms = float(np.sqrt(np.mean(mag**2)))
    if rms == 0:
        raise ParameterError("cannot extract the phase of an all-zero field")
    gap = mag < GAP_THRESHOLD * rms
    n_gaps = int(np.count_nonzero(gap))

    phase = np.unwrap(np.angle(samples))
    if n_gaps:
        logger.warning("phase extraction: %d of %d samples below the amplitude floor", n_gaps, samples.size)
        idx = np.arange(samples.size)
        good = ~gap
        if not np.any(good):
            raise ParameterError("no sample of the field is above the amplitude floor")
        phase = np.unwrap(np.interp(idx, idx[good], np.unwrap(np.angle(samples[good]))))
    if remove_mean:
        phase = phase - phase.mean()
    return PhaseSeries(values=phase, sample_rate=f.sample_rate, mean_removed=remove_mean, gaps=n_gaps)


def _windowed(series: PhaseSeries, window: Optional[str]) -> np.ndarray:
    if window is None:
        return series.values
    w = ssignal.get_window(window, series.n_samples, fftbins=True)
    # Keep the mean-square of the record unchanged.
    return series.values * w / np.sqrt(np.mean(w**2))


def phase_psd(series: Sequence[PhaseSeries], *, window: Optional[str] = None) -> PhaseSpectrum:
    """Per-tone phase amplitude spectrum, power-averaged over realizations."""
    if not series:
        raise ParameterError("phase_psd needs at least one realization")
    first = series[0]
    for s in series[1:]:
        if s.n_samples != first.n_samples or s.sample_rate != first.sample_rate:
            raise ParameterError("phase series are on different grids")
    spectra = [amplitude_spectrum(_windowed(s, window), s.sample_rate) for s in series]
    avg = ensemble_rms(spectra)
    return PhaseSpectrum(
        values=avg.values,
        freqs=avg.freqs,
        provenance="measured",
        metadata={"realizations": len(series), "window": window or "none"},
    )


def phase_variance_measured(series: Sequence[PhaseSeries]) -> float:
    """Time and ensemble average of phi^2, rad^2."""
    if not series:
        raise ParameterError("need at least one realization")
    return float(np.mean([s.power() for s in series]))


def tone_amplitude(spectrum: PhaseSpectrum, f0: float) -> float:
    """Peak amplitude of a real tone at `f0`: twice the per-tone reading."""
    idx = int(np.argmin(np.abs(spectrum.freqs - f0)))
    return 2.0 * float(spectrum.values[idx])
