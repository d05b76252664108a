"""Root-raised-cosine shaping as a frequency-domain filter on the periodic grid."""

from __future__ import annotations

from dataclasses import replace
from typing import Optional

import numpy as np
from scipy import fft as sfft

from ..errors import ParameterError
from .field import SampledField, is_power_of_two, set_launch_power
from .qam import ConstellationSpec, draw_qam_labels

__all__ = [
    "MIN_SHAPED_SYMBOLS",
    "rrc_frequency_response",
    "rrc_impulse_response",
    "rrc_shape",
    "rrc_matched_filter",
    "generate_subcarrier",
]

MIN_SHAPED_SYMBOLS = 32


def rrc_frequency_response(freqs: np.ndarray, symbol_rate: float, rolloff: float) -> np.ndarray:
    """RRC amplitude response with unit pass-band gain; H(R/2) = sqrt(1/2)."""
    f = np.abs(np.asarray(freqs, dtype=np.float64))
    half = 0.5 * symbol_rate
    lo = half * (1.0 - rolloff)
    hi = half * (1.0 + rolloff)
    h = np.zeros_like(f)
    h[f <= lo] = 1.0
    if rolloff > 0:
        edge = (f > lo) & (f <= hi)
        h[edge] = np.sqrt(0.5 * (1.0 + np.cos(np.pi / (rolloff * symbol_rate) * (f[edge] - lo))))
    return h


def _check_shaping(n_symbols: int, samples_per_symbol: int, rolloff: float) -> None:
    if n_symbols < MIN_SHAPED_SYMBOLS:
        raise ParameterError(f"filter span too short: need >= {MIN_SHAPED_SYMBOLS} symbols, got {n_symbols}")
    if samples_per_symbol < 2.0 * (1.0 + rolloff):
        raise ParameterError(
            f"samples_per_symbol={samples_per_symbol} violates Nyquist for rolloff {rolloff}"
        )
    if not is_power_of_two(n_symbols * samples_per_symbol):
        raise ParameterError("symbols * samples_per_symbol must be a power of two")


def rrc_impulse_response(n_samples: int, samples_per_symbol: int, rolloff: float) -> np.ndarray:
    """Periodic RRC pulse centred on sample 0, scaled like `rrc_shape`."""
    freqs = sfft.fftfreq(n_samples, d=1.0 / samples_per_symbol)
    return sfft.ifft(rrc_frequency_response(freqs, 1.0, rolloff)) * samples_per_symbol


def rrc_shape(
    symbols: np.ndarray,
    symbol_rate: float,
    rolloff_beta: float,
    samples_per_symbol: int,
) -> SampledField:
    syms = np.asarray(symbols, dtype=np.complex128)
    sps = int(samples_per_symbol)
    _check_shaping(syms.size, sps, rolloff_beta)
    n = syms.size * sps
    sample_rate = symbol_rate * sps

    upsampled = np.zeros(n, dtype=np.complex128)
    upsampled[::sps] = syms
    h = rrc_frequency_response(sfft.fftfreq(n, d=1.0 / sample_rate), symbol_rate, rolloff_beta)
    shaped = sfft.ifft(sfft.fft(upsampled) * h) * sps
    return SampledField(
        samples=shaped,
        sample_rate=sample_rate,
        metadata={
            "description": "rrc",
            "symbol_count": int(syms.size),
            "symbol_rate": float(symbol_rate),
            "rolloff": float(rolloff_beta),
        },
    )


def rrc_matched_filter(
    f: SampledField,
    symbol_rate: float,
    rolloff_beta: float,
    *,
    sample_offset: int = 0,
) -> np.ndarray:
    """Matched-filter `f` (referenced to the subcarrier centre) and sample at symbol instants."""
    sps_float = f.sample_rate / symbol_rate
    sps = int(round(sps_float))
    if abs(sps - sps_float) > 1e-9:
        raise ParameterError("sample_rate must be an integer multiple of symbol_rate")
    h = rrc_frequency_response(f.frequency_axis(), symbol_rate, rolloff_beta)
    filtered = sfft.ifft(sfft.fft(f.samples) * h)
    return filtered[sample_offset::sps]


def generate_subcarrier(
    spec: ConstellationSpec,
    symbol_rate: float,
    rolloff: float,
    n_samples: int,
    sample_rate: float,
    power: float,
    seed: int,
    *,
    center_offset: float = 0.0,
    labels: Optional[np.ndarray] = None,
) -> SampledField:
    """One RRC-shaped M-QAM subcarrier on an `n_samples` grid at `sample_rate`.

    The grid fixes the symbol count (n_samples / samples_per_symbol); the launch
    power is applied from the measured mean power.
    """
    sps_float = sample_rate / symbol_rate
    sps = int(round(sps_float))
    if abs(sps - sps_float) > 1e-9:
        raise ParameterError(
            f"sample_rate {sample_rate} GHz is not an integer multiple of symbol_rate {symbol_rate} GHz"
        )
    if n_samples % sps:
        raise ParameterError("grid length is not a whole number of symbols")
    count = n_samples // sps
    if labels is None:
        labels = draw_qam_labels(spec, count, seed)
    shaped = rrc_shape(spec.modulate(labels), symbol_rate, rolloff, sps)
    shaped = set_launch_power(shaped, power)
    return replace(
        shaped,
        center_frequency_offset=center_offset,
        metadata={
            **shaped.metadata,
            "description": f"{spec.qam_order}-QAM {symbol_rate:g} GBd",
            "seed": int(seed),
            "qam_order": spec.qam_order,
            "labels": labels,
        },
    )
