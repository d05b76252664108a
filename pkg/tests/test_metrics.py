from __future__ import annotations

import math

import numpy as np
import pytest

from xpm_if.errors import ParameterError, PhaseLimitedError
from xpm_if.metrics.evm import (
    align_to_reference,
    count_bit_errors,
    estimate_snr,
    evm,
    radial_snr,
    snr_from_evm,
)
from xpm_if.metrics.phase import (
    PhaseSeries,
    extract_phase,
    phase_psd,
    phase_variance_measured,
    tone_amplitude,
)
from xpm_if.propagation.spectra import amplitude_spectrum
from xpm_if.signal.field import SampledField, cw_probe
from xpm_if.signal.qam import ConstellationSpec, draw_qam_labels

N = 4096
RATE = 64.0


def _phase_field(phase: np.ndarray, power: float = 1e-5) -> SampledField:
    return SampledField(samples=np.sqrt(power) * np.exp(1j * phase), sample_rate=RATE)


def test_cw_probe_has_no_phase():
    series = extract_phase(cw_probe(1e-5, N, RATE))
    assert np.sqrt(series.power()) < 1e-6


def test_static_offset_is_removed():
    series = extract_phase(_phase_field(np.full(N, math.pi / 3)))
    assert np.allclose(series.values, 0.0, atol=1e-12)
    kept = extract_phase(_phase_field(np.full(N, math.pi / 3)), remove_mean=False)
    assert kept.values[0] == pytest.approx(math.pi / 3)


def test_unwrapped_phase_has_no_jumps():
    t = np.arange(N) / RATE
    series = extract_phase(_phase_field(3.0 * t))
    assert abs(float(np.mean(series.values))) < 1e-9
    assert np.max(np.abs(np.diff(series.values))) < math.pi


def test_injected_tone_is_recovered():
    t = np.arange(N) / RATE
    series = extract_phase(_phase_field(0.01 * np.cos(2 * np.pi * 1.0 * t)))
    spectrum = phase_psd([series])
    assert tone_amplitude(spectrum, 1.0) == pytest.approx(0.01, rel=0.01)
    occupied = np.flatnonzero(spectrum.values > 1e-9)
    assert sorted(spectrum.freqs[occupied].tolist()) == [-1.0, 1.0]


def test_phase_and_intensity_share_one_convention():
    t = np.arange(N) / RATE
    tone = 0.02 * np.cos(2 * np.pi * 2.0 * t)
    phase_reading = tone_amplitude(phase_psd([extract_phase(_phase_field(tone))]), 2.0)
    intensity = amplitude_spectrum(1.0 + tone, RATE)
    idx = int(np.argmin(np.abs(intensity.freqs - 2.0)))
    assert phase_reading == pytest.approx(2.0 * intensity.values[idx], rel=1e-6)


def test_psd_sums_to_measured_variance(rng):
    series = [extract_phase(_phase_field(0.03 * rng.standard_normal(N))) for _ in range(4)]
    assert phase_psd(series).variance() == pytest.approx(phase_variance_measured(series), rel=1e-6)


def test_white_phase_noise_variance(rng):
    series = extract_phase(_phase_field(math.sqrt(1e-3) * rng.standard_normal(2**14)))
    assert 0.95e-3 <= phase_variance_measured([series]) <= 1.05e-3
    assert phase_psd([series]).variance() == pytest.approx(1e-3, rel=0.05)


def test_averaging_reduces_estimator_spread(rng):
    def realization():
        return extract_phase(_phase_field(0.05 * rng.standard_normal(1024)))

    one = phase_psd([realization()]).values[1:512] ** 2
    many = phase_psd([realization() for _ in range(16)]).values[1:512] ** 2
    ratio = (np.var(one) / np.mean(one) ** 2) / (np.var(many) / np.mean(many) ** 2)
    assert 8.0 < ratio < 32.0


def test_phase_scales_linearly():
    t = np.arange(N) / RATE
    base = 0.01 * np.sin(2 * np.pi * 3.0 * t)
    small = tone_amplitude(phase_psd([extract_phase(_phase_field(base))]), 3.0)
    large = tone_amplitude(phase_psd([extract_phase(_phase_field(3 * base))]), 3.0)
    assert large / small == pytest.approx(3.0, rel=1e-6)


def test_windowed_psd_keeps_power(rng):
    series = extract_phase(_phase_field(0.02 * rng.standard_normal(N)))
    plain = phase_psd([series]).variance()
    windowed = phase_psd([series], window="hann")
    assert windowed.metadata["window"] == "hann"
    assert windowed.variance() == pytest.approx(plain, rel=0.1)


def test_zero_amplitude_samples_are_bridged(caplog):
    samples = np.sqrt(1e-5) * np.exp(1j * np.linspace(0, 0.5, N))
    samples[100:104] = 0.0
    with caplog.at_level("WARNING", logger="xpm_if.metrics.phase"):
        series = extract_phase(SampledField(samples=samples, sample_rate=RATE), remove_mean=False)
    assert series.gaps == 4
    assert np.all(np.isfinite(series.values))
    assert series.values[102] == pytest.approx(0.5 * 102 / (N - 1), rel=1e-6)
    assert "amplitude floor" in caplog.text


def test_zero_series_has_zero_variance():
    assert phase_variance_measured([PhaseSeries(values=np.zeros(16), sample_rate=RATE)]) == 0.0
    with pytest.raises(ParameterError):
        phase_variance_measured([])


def test_phase_psd_rejects_mixed_grids():
    with pytest.raises(ParameterError):
        phase_psd([PhaseSeries(np.zeros(16), RATE), PhaseSeries(np.zeros(32), RATE)])


# EVM and SNR.


def test_evm_of_exact_symbols_is_zero():
    spec = ConstellationSpec(16)
    tx = spec.modulate(draw_qam_labels(spec, 1000, seed=1))
    assert evm(tx, spec) == 0.0
    assert evm(tx, spec, tx) == 0.0
    assert snr_from_evm(0.0) == math.inf


def test_evm_under_awgn(rng):
    spec = ConstellationSpec(16)
    tx = spec.modulate(draw_qam_labels(spec, 2**16, seed=2))
    sigma = math.sqrt(1 / (2 * 100.0))
    rx = tx + sigma * (rng.standard_normal(tx.size) + 1j * rng.standard_normal(tx.size))
    assert evm(rx, spec, tx) == pytest.approx(0.1, rel=0.03)


def test_evm_of_small_rotation():
    spec = ConstellationSpec(4)
    tx = spec.modulate(draw_qam_labels(spec, 1000, seed=3))
    assert evm(tx * np.exp(1j * 0.01), spec) == pytest.approx(0.01, rel=1e-3)


def test_align_to_reference_removes_gain_and_rotation():
    spec = ConstellationSpec(16)
    tx = spec.modulate(draw_qam_labels(spec, 500, seed=4))
    rx = 0.3 * np.exp(1j * 0.7) * tx
    assert np.allclose(align_to_reference(rx, tx), tx)


def test_estimate_snr_switches_reference(rng):
    spec = ConstellationSpec(16)
    labels = draw_qam_labels(spec, 2**14, seed=5)
    tx = spec.modulate(labels)

    clean = tx + 0.02 * (rng.standard_normal(tx.size) + 1j * rng.standard_normal(tx.size))
    est = estimate_snr(clean, spec, labels)
    assert est.decision_directed
    assert est.bit_errors == 0

    noisy = tx + 0.3 * (rng.standard_normal(tx.size) + 1j * rng.standard_normal(tx.size))
    est = estimate_snr(noisy, spec, labels)
    assert not est.decision_directed
    assert est.ber > 1e-2
    assert est.snr_db == pytest.approx(10 * math.log10(1 / (2 * 0.3**2)), abs=0.3)


def test_count_bit_errors_counts_single_flips():
    spec = ConstellationSpec(16)
    labels = np.array([0, 5, 15])
    rx = spec.modulate(np.array([1, 5, 15]))
    assert count_bit_errors(spec, rx, labels) == 1


def test_radial_snr():
    assert radial_snr(100.0, 0.0) == pytest.approx(100.0)
    assert radial_snr(100.0, 5e-3) == pytest.approx(200.0)
    with pytest.raises(PhaseLimitedError):
        radial_snr(100.0, 0.01)
    with pytest.raises(ParameterError):
        radial_snr(0.0, 1e-3)
