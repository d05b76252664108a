"""Receiver-side linear blocks: dispersion compensation and channel selection."""

from __future__ import annotations

import numpy as np
from scipy import fft as sfft

from ..constants.physics import REFERENCE_WAVELENGTH_NM
from ..errors import ParameterError
from ..signal.field import SampledField, shift_reference
from ..units.params import dispersion_to_beta2
from .ssfm import angular_frequency, linear_operator

__all__ = ["chromatic_dispersion_compensate", "bandpass_filter"]


def chromatic_dispersion_compensate(
    f: SampledField,
    accumulated_D_L: float,
    wavelength_nm: float = REFERENCE_WAVELENGTH_NM,
) -> SampledField:
    """Undo `accumulated_D_L` ps/nm of fiber dispersion (all-pass)."""
    if accumulated_D_L == 0:
        return f
    # beta2 of a 1 km fiber carrying the whole accumulated dispersion, run backwards.
    beta2_acc = dispersion_to_beta2(accumulated_D_L, wavelength_nm)
    h = linear_operator(angular_frequency(f), -beta2_acc, 0.0, 1.0)
    return f.with_samples(sfft.ifft(sfft.fft(f.samples) * h), cdc_ps_nm=float(accumulated_D_L))


def bandpass_filter(f: SampledField, center_offset: float, bandwidth: float) -> SampledField:
    """Ideal brick-wall selection of [center - bw/2, center + bw/2].

    The result is referenced to `center_offset`, i.e. the selected channel is
    down-converted to baseband.
    """
    if bandwidth <= 0:
        raise ParameterError(f"bandwidth must be > 0 GHz, got {bandwidth}")
    nyquist = 0.5 * f.sample_rate
    lo = center_offset - 0.5 * bandwidth
    hi = center_offset + 0.5 * bandwidth
    ref = f.center_frequency_offset
    if lo < ref - nyquist - 1e-9 or hi > ref + nyquist + 1e-9:
        raise ParameterError(
            f"band [{lo:.3f}, {hi:.3f}] GHz exceeds the simulation grid +-{nyquist:.3f} GHz"
        )
    moved = shift_reference(f, center_offset)
    freqs = moved.frequency_axis()
    if bandwidth >= f.sample_rate:
        return moved.with_samples(moved.samples, bandpass_ghz=float(bandwidth))
    mask = np.abs(freqs) <= 0.5 * bandwidth
    spec = sfft.fft(moved.samples)
    spec[~mask] = 0.0
    return moved.with_samples(sfft.ifft(spec), bandpass_ghz=float(bandwidth))
