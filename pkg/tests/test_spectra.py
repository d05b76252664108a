from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import fft as sfft

from xpm_if.errors import ParameterError
from xpm_if.propagation.spectra import (
    IfStack,
    Spectrum,
    amplitude_spectrum,
    amplitude_statistics,
    band_average,
    ensemble_rms,
    intensity_fluctuation_spectrum,
    spectral_deviation_db,
)
from xpm_if.signal.field import SampledField

FREQS = sfft.fftfreq(1024, d=1.0 / 64.0)


def _flat(level: float) -> Spectrum:
    values = np.full(FREQS.size, level)
    values[0] = 0.0
    return Spectrum(values=values, freqs=FREQS)


def test_tone_reads_half_amplitude():
    t = np.arange(1024) / 64.0
    spectrum = amplitude_spectrum(3.0 + 0.4 * np.cos(2 * np.pi * 4.0 * t), 64.0)
    assert spectrum.values[0] == 0.0
    assert spectrum.at(4.0) == pytest.approx(0.2)
    assert spectrum.at(-4.0) == pytest.approx(0.2)
    assert spectrum.total_power() == pytest.approx(0.4**2 / 2)


def test_intensity_spectrum_of_modulated_field():
    t = np.arange(1024) / 64.0
    power = 1e-3 * (1 + 0.1 * np.cos(2 * np.pi * 2.0 * t))
    f = SampledField(samples=np.sqrt(power).astype(complex), sample_rate=64.0)
    spectrum = intensity_fluctuation_spectrum(f)
    assert spectrum.at(2.0) == pytest.approx(0.5e-4)
    assert spectrum.total_power() == pytest.approx(float(np.var(power)))


def test_spectrum_rejects_negative_or_mismatched_values():
    with pytest.raises(ParameterError):
        Spectrum(values=np.array([-1.0]), freqs=np.array([0.0]))
    with pytest.raises(ParameterError):
        Spectrum(values=np.zeros(3), freqs=np.zeros(4))


def test_ensemble_rms():
    avg = ensemble_rms([_flat(3.0), _flat(4.0)])
    assert avg.values[5] == pytest.approx(math.sqrt(12.5))
    other = Spectrum(values=np.zeros(8), freqs=np.arange(8.0))
    with pytest.raises(ParameterError):
        ensemble_rms([_flat(1.0), other])


def test_if_stack_invariants():
    stack = IfStack(per_span=(_flat(1.0), _flat(2.0), _flat(3.0)))
    assert len(stack) == 3
    assert stack.amplitudes().shape == (3, FREQS.size)
    assert np.all(stack.constant().amplitudes()[2] == stack.per_span[0].values)
    assert len(stack.truncated(2)) == 2
    assert stack.scaled(2.0).per_span[1].values[3] == pytest.approx(4.0)
    with pytest.raises(ParameterError):
        stack.amplitudes(4)
    with pytest.raises(ParameterError):
        IfStack(per_span=())
    dc = np.ones(FREQS.size)
    with pytest.raises(ParameterError):
        IfStack(per_span=(Spectrum(values=dc, freqs=FREQS),))


def test_if_stack_from_realizations():
    realizations = [[_flat(3.0), _flat(1.0)], [_flat(4.0), _flat(1.0)]]
    stack = IfStack.from_realizations(realizations)
    assert stack.realizations == 2
    assert stack.per_span[0].values[7] == pytest.approx(math.sqrt(12.5))
    single = IfStack.from_realizations(realizations, single_shot=True)
    assert single.per_span[0].values[7] == pytest.approx(3.0)
    assert single.metadata["single_shot"]


def test_band_average_keeps_power():
    averaged = band_average(_flat(2.0), 1.0)
    assert np.allclose(averaged.values, 2.0)
    assert averaged.freqs.min() > 0
    assert averaged.freqs.size == 32


def test_spectral_deviation():
    assert spectral_deviation_db(_flat(1.0), _flat(1.0), 0.5, 16.0) == pytest.approx(0.0)
    assert spectral_deviation_db(_flat(2.0), _flat(1.0), 0.5, 16.0) == pytest.approx(20 * math.log10(2.0))
    with pytest.raises(ParameterError):
        spectral_deviation_db(_flat(1.0), _flat(1.0), 40.0, 50.0)


def test_rayleigh_amplitude_statistic(rng):
    spectra = []
    for _ in range(64):
        values = np.abs(rng.standard_normal(FREQS.size) + 1j * rng.standard_normal(FREQS.size))
        values[0] = 0.0
        spectra.append(Spectrum(values=values, freqs=FREQS))
    assert amplitude_statistics(spectra) == pytest.approx(math.sqrt(math.pi / 4), abs=0.01)
    with pytest.raises(ParameterError):
        amplitude_statistics(spectra[:1])
