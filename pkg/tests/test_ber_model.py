from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import special

from xpm_if.ber.model import (
    BerCurvePoint,
    BerQuery,
    ber_conditional,
    ber_phase_noise,
    predict_ber_curve,
    simulate_ber_monte_carlo,
)
from xpm_if.errors import ParameterError, UnsupportedConstellationError


def _db(x: float) -> float:
    return 10 ** (x / 10)


@pytest.mark.parametrize("snr_db", [0.0, 6.0, 10.0])
def test_qpsk_matches_textbook(snr_db):
    snr = _db(snr_db)
    assert ber_conditional(4, snr, 0.0) == pytest.approx(float(special.ndtr(-math.sqrt(snr))), rel=1e-12)


def test_qpsk_against_monte_carlo():
    snr = _db(6.0)
    mc = simulate_ber_monte_carlo(4, snr, 0.0, 5_000_000, seed=7)
    assert mc.bits == 10_000_000
    assert abs(mc.ber - ber_conditional(4, snr, 0.0)) < 4 * mc.std_error


def test_high_snr_is_error_free():
    assert ber_conditional(16, _db(40.0), 0.0) < 1e-100


def test_qpsk_rotated_onto_boundaries():
    # One bit of every symbol sits on its decision boundary.
    assert ber_conditional(4, _db(40.0), math.pi / 4) == pytest.approx(0.25, abs=1e-9)
    mc = simulate_ber_monte_carlo(4, _db(40.0), 0.0, 1_000_000, seed=0, rotation=math.pi / 4)
    assert abs(mc.ber - 0.25) < 4 * mc.std_error
    aligned = simulate_ber_monte_carlo(4, _db(40.0), 0.0, 100_000, seed=0)
    assert aligned.bit_errors == 0


def test_monte_carlo_rotation_matches_conditional():
    snr = _db(12.0)
    mc = simulate_ber_monte_carlo(16, snr, 0.0, 2_000_000, seed=3, rotation=0.08)
    assert mc.bit_errors > 1000
    assert mc.ber == pytest.approx(ber_conditional(16, snr, 0.08), rel=0.1)


@pytest.mark.parametrize("m", [4, 16, 64])
def test_conditional_is_symmetric_in_theta(m):
    assert ber_conditional(m, _db(15.0), 0.05) == pytest.approx(ber_conditional(m, _db(15.0), -0.05), rel=1e-12)


def test_zero_phase_noise_reduces_to_conditional():
    query = BerQuery(16, _db(16.0), 0.0)
    assert ber_phase_noise(query) == ber_conditional(16, _db(16.0), 0.0)


def test_phase_noise_average_against_monte_carlo():
    snr = _db(18.0)
    sigma2 = 1.3e-3
    predicted = ber_phase_noise(BerQuery(16, snr, sigma2))
    mc = simulate_ber_monte_carlo(16, snr, sigma2, 2_000_000, seed=11)
    assert mc.bit_errors > 500
    assert mc.ber == pytest.approx(predicted, rel=0.1)


def test_ber_increases_with_phase_variance():
    snr = _db(18.0)
    values = [ber_phase_noise(BerQuery(16, snr, s)) for s in (0.0, 5e-4, 1e-3, 2e-3, 4e-3)]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_ber_decreases_with_snr():
    values = [ber_phase_noise(BerQuery(16, _db(s), 1e-3)) for s in (12.0, 14.0, 16.0, 18.0)]
    assert all(b < a for a, b in zip(values, values[1:]))


def test_ber_stays_in_range():
    for theta in np.linspace(-math.pi, math.pi, 13):
        assert 0.0 <= ber_conditional(16, _db(10.0), float(theta)) <= 1.0


@pytest.mark.parametrize(
    "kwargs, error",
    [
        ({"qam_order": 8, "snr_rad_linear": 10.0, "sigma2_phase": 0.0}, UnsupportedConstellationError),
        ({"qam_order": 16, "snr_rad_linear": 0.0, "sigma2_phase": 0.0}, ParameterError),
        ({"qam_order": 16, "snr_rad_linear": 10.0, "sigma2_phase": -1e-3}, ParameterError),
        ({"qam_order": 16, "snr_rad_linear": 10.0, "sigma2_phase": 0.0, "quadrature_nodes": 8}, ParameterError),
    ],
)
def test_query_validation(kwargs, error):
    with pytest.raises(error):
        BerQuery(**kwargs)


def test_curve_shares_radial_snr_and_flags_phase_limit():
    points = [
        BerCurvePoint(launch_power_dbm=-6.0, sigma2_evolving=2e-4, sigma2_constant=1.5e-4, snr_total_linear=_db(18.0)),
        BerCurvePoint(launch_power_dbm=2.0, sigma2_evolving=3e-3, sigma2_constant=1.5e-3, snr_total_linear=_db(16.0)),
        BerCurvePoint(launch_power_dbm=6.0, sigma2_evolving=0.5, sigma2_constant=0.2, snr_total_linear=_db(10.0)),
    ]
    rows = predict_ber_curve(16, points)
    assert len(rows) == 3

    low, high, limited = rows
    expected_rad = 1.0 / (1.0 / _db(18.0) - 2e-4)
    assert low.snr_rad_db == pytest.approx(10 * math.log10(expected_rad))
    assert low.ber_constant == pytest.approx(low.ber_evolving, rel=0.1)
    assert high.ber_constant < high.ber_evolving

    assert limited.phase_limited
    assert math.isnan(limited.ber_evolving)
    assert not low.phase_limited
