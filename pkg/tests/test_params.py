from __future__ import annotations

import math

import pytest

from xpm_if.errors import ParameterError
from xpm_if.units.params import (
    ChannelPlan,
    FiberParams,
    LinkConfig,
    ProbeSpec,
    SubcarrierSpec,
    attenuation_to_linear,
    beta2_to_dispersion,
    delta_lambda_to_spacing,
    dispersion_to_beta2,
    effective_length,
    nonlinear_coefficient,
    spacing_to_delta_lambda,
    subcarrier_offsets,
)


@pytest.mark.parametrize(
    "db_per_km, expected",
    [(0.0, 0.0), (0.2, 0.046052), (10.0, 2.302585)],
)
def test_attenuation_to_linear(db_per_km, expected):
    assert attenuation_to_linear(db_per_km) == pytest.approx(expected, abs=1e-6)


def test_attenuation_rejects_gain():
    with pytest.raises(ParameterError):
        attenuation_to_linear(-0.1)


def test_effective_length_limits():
    assert effective_length(0.0, 80.0) == 80.0
    assert effective_length(0.046052, 80.0) == pytest.approx(21.17, abs=0.01)
    assert effective_length(0.046052, math.inf) == pytest.approx(21.715, abs=1e-3)


def test_effective_length_is_monotone():
    alpha = attenuation_to_linear(0.2)
    lengths = [effective_length(alpha, L) for L in (10.0, 40.0, 80.0, 160.0)]
    assert lengths == sorted(lengths)
    losses = [effective_length(a, 80.0) for a in (0.01, 0.05, 0.1)]
    assert losses == sorted(losses, reverse=True)
    for L in (10.0, 80.0, 500.0):
        assert effective_length(alpha, L) <= min(L, 1.0 / alpha)


def test_effective_length_rejects_nonpositive_length():
    with pytest.raises(ParameterError):
        effective_length(0.05, 0.0)


def test_nonlinear_coefficient():
    gamma = nonlinear_coefficient(2.6e-20, 80e-12, 1550.0)
    assert gamma == pytest.approx(1.317, abs=1e-3)
    assert nonlinear_coefficient(5.2e-20, 80e-12, 1550.0) == pytest.approx(2 * gamma)
    assert nonlinear_coefficient(2.6e-20, 160e-12, 1550.0) == pytest.approx(gamma / 2)


def test_dispersion_to_beta2_sign_and_value():
    assert dispersion_to_beta2(0.0, 1550.0) == 0.0
    assert dispersion_to_beta2(16.0, 1550.0) == pytest.approx(-20.4, abs=0.05)
    assert dispersion_to_beta2(-16.0, 1550.0) == pytest.approx(20.4, abs=0.05)


@pytest.mark.parametrize("d", [-17.0, 0.5, 16.0, 120.0])
def test_dispersion_round_trip(d):
    back = beta2_to_dispersion(dispersion_to_beta2(d, 1550.0), 1550.0)
    assert back == pytest.approx(d, rel=1e-12)


def test_spacing_to_delta_lambda():
    assert spacing_to_delta_lambda(0.0, 1550.0) == 0.0
    assert spacing_to_delta_lambda(50.0, 1550.0) == pytest.approx(0.4006, abs=1e-4)
    assert spacing_to_delta_lambda(100.0, 1550.0) == pytest.approx(0.8011, abs=1e-4)
    assert delta_lambda_to_spacing(spacing_to_delta_lambda(37.5, 1550.0), 1550.0) == pytest.approx(37.5)


def test_fiber_derived_values_track_raw_fields(ssmf):
    assert ssmf.gamma == pytest.approx(1.317, abs=1e-3)
    wider = ssmf.with_overrides(a_eff=160e-12)
    assert wider.gamma == pytest.approx(ssmf.gamma / 2)
    assert ssmf.with_overrides(dispersion_D=-16.0).beta2 == pytest.approx(-ssmf.beta2)
    assert ssmf.span_loss_db == pytest.approx(16.0)


@pytest.mark.parametrize(
    "changes",
    [{"alpha_db_per_km": -0.1}, {"a_eff": 0.0}, {"span_length_L": 0.0}, {"ref_wavelength": -1.0}],
)
def test_fiber_rejects_bad_fields(changes):
    with pytest.raises(ParameterError):
        FiberParams(**changes)


def test_linear_fiber_has_zero_gamma(linear_fiber):
    assert linear_fiber.gamma == 0.0


def test_link_config(ssmf):
    link = LinkConfig.transparent(ssmf, 10, noise_figure_db=5.0)
    assert link.is_transparent
    assert link.accumulated_dispersion_ps_nm == pytest.approx(16.0 * 80.0 * 10)
    assert LinkConfig(fiber=ssmf).is_transparent
    assert not LinkConfig(fiber=ssmf, amp_gain_db=10.0).is_transparent
    with pytest.raises(ParameterError):
        LinkConfig(fiber=ssmf, num_spans_N=0)


def test_channel_plan_spacing_invariant(desk_plan):
    assert desk_plan.pump_center_offset - desk_plan.probe_center_offset == pytest.approx(50.0)
    with pytest.raises(ParameterError):
        ChannelPlan(
            pump_center_offset=25.0,
            probe_center_offset=-20.0,
            channel_spacing=50.0,
            pump_subcarriers=(SubcarrierSpec(symbol_rate=32.0),),
        )


def test_channel_plan_guard_band(desk_plan):
    lo, hi = desk_plan.pump_band
    assert lo == pytest.approx(25.0 - 16.8)
    assert hi == pytest.approx(25.0 + 16.8)
    desk_plan.check_fits(256.0)
    with pytest.raises(ParameterError):
        desk_plan.check_fits(80.0)


def test_channel_plan_with_spacing(desk_plan):
    moved = desk_plan.with_spacing(100.0)
    assert moved.pump_center_offset == 50.0
    assert moved.probe_center_offset == -50.0


def test_qam_probe_needs_subcarriers():
    with pytest.raises(ParameterError):
        ProbeSpec(kind="qam", power=1e-3)


def test_subcarrier_offsets_leave_requested_gap():
    offsets = subcarrier_offsets(2, 16.0, 0.05, 0.25)
    assert offsets[1] - offsets[0] == pytest.approx(16.8 + 0.25)
    assert sum(offsets) == pytest.approx(0.0)
