"""End-to-end checks against the split-step oracle. Minutes each; run with `-m slow`."""

from __future__ import annotations

import numpy as np
import pytest

from xpm_if.harness.oracle import run_oracle, single_tone_oracle
from xpm_if.harness.presets import load_config
from xpm_if.harness.recipes import TONE_BEATS_GHZ, _setup, cmd_ber, cmd_multi_span, cmd_sweep, cmd_validate
from xpm_if.propagation.ssfm import StepConfig
from xpm_if.units.params import FiberParams

pytestmark = pytest.mark.slow


@pytest.fixture
def small_cfg(out_dir):
    cfg = load_config(preset="desk")
    cfg = cfg.with_section("channels", grid_samples=1 << 14)
    cfg = cfg.with_section("step", step_km=0.5)
    return cfg.with_section("run", realizations=4)


def test_single_tone_within_five_percent():
    checks = single_tone_oracle(FiberParams(), TONE_BEATS_GHZ, step=StepConfig(step_km=0.1))
    for check in checks:
        assert check.relative_error < 0.05, check


def test_validate_gates_pass(small_cfg):
    result = cmd_validate(small_cfg.with_section("q_ratio", spans=[1, 2, 5], c_points=16, trials=10_000))
    failed = [name for name, ok in result.gates.items() if not ok]
    assert not failed


def test_evolving_exceeds_constant_over_spans(small_cfg):
    result = cmd_multi_span(small_cfg, num_spans=3)
    sigma2 = result.summary["sigma2"]
    assert sigma2["constant"] < sigma2["evolving"]
    assert sigma2["evolving"] == pytest.approx(sigma2["measured"], rel=0.25)
    assert (result.out_dir / "if_stack.bin").exists()


def test_variance_is_quadratic_in_pump_power(small_cfg):
    cfg = small_cfg.with_section("link", num_spans=2)
    result = cmd_sweep(cfg, "power", [-3.0, 0.0, 3.0])
    assert result.gates["analytic_slope"]
    assert result.summary["slopes"]["measured"] == pytest.approx(2.0, abs=0.2)


def test_ber_curve_orders_constant_below_evolving(small_cfg):
    cfg = small_cfg.with_section("ber", num_spans=3)
    result = cmd_ber(cfg, [-8.0, 2.0])
    rows = result.summary["rows"]
    assert len(rows) == 2
    high = rows[-1]
    assert high["sigma2_constant"] < high["sigma2_evolving"]
    if not high["phase_limited"]:
        assert high["ber_constant"] <= high["ber_evolving"]
    table = result.out_dir / "ber.csv"
    assert "ber_oracle" in table.read_text()


def test_desk_spectrum_gates_at_five_spans(out_dir):
    result = cmd_multi_span(load_config(preset="desk"), num_spans=5)
    deviations = result.summary["deviation_db"]
    assert deviations["analytic-evolving"] < deviations["analytic-constant"]
    for gate in ("evolving_within_1p5_db", "evolving_closer_80pct", "evolving_beats_constant", "evolving_variance_15pct"):
        assert result.gates[gate], (gate, result.summary)


def test_low_frequency_if_grows_with_span_index(out_dir):
    cfg = load_config(preset="desk").with_section("channels", grid_samples=1 << 16)
    cfg = cfg.with_section("step", step_km=0.5)
    stack = run_oracle(_setup(cfg, num_spans=5), 32).if_stack()
    freqs = stack.freqs
    low = (freqs > 0) & (freqs <= 0.5)
    power = [float(np.mean(s.values[low] ** 2)) for s in stack.per_span]
    assert all(b > a for a, b in zip(power[1:], power[2:])), power
    assert power[4] > power[0]


def test_paper_channels_variance_within_15pct(out_dir):
    cfg = load_config(preset="paper").with_section("channels", grid_samples=1 << 16)
    cfg = cfg.with_section("step", step_km=0.5).with_section("run", realizations=16)
    result = cmd_multi_span(cfg)
    sigma2 = result.summary["sigma2"]
    assert sigma2["evolving"] == pytest.approx(sigma2["measured"], rel=0.15)
    assert result.gates["evolving_variance_15pct"]


@pytest.mark.parametrize(
    ("param", "values"),
    [("spacing", [50.0, 100.0, 200.0]), ("dispersion", [2.0, 8.0, 16.0])],
)
def test_variance_falls_with_spacing_and_dispersion(small_cfg, param, values):
    result = cmd_sweep(small_cfg.with_section("link", num_spans=2), param, values)
    for key in ("constant", "evolving", "measured"):
        assert result.gates[f"{key}_decreasing"], result.summary["sigma2"]
    if param == "dispersion":
        assert "incoherent_gap_shrinks_with_dispersion" in result.gates
