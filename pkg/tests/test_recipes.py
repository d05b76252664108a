from __future__ import annotations

import numpy as np
import pytest
from scipy import fft as sfft

from xpm_if.ber.model import BerCurveRow
from xpm_if.errors import ParameterError
from xpm_if.harness.pool import run_indexed
from xpm_if.harness.presets import load_config
from xpm_if.harness.records import read_records
from xpm_if.harness.recipes import (
    _ber_gates,
    _fit_grid,
    _with_symbol_oracle,
    _gap_shrinks,
    _sweep_setup,
    cmd_link_factor,
    cmd_q_ratio,
)
from xpm_if.propagation.cache import write_if_cache
from xpm_if.propagation.spectra import IfStack, Spectrum


@pytest.fixture
def desk_cfg(out_dir):
    return load_config(preset="desk")


def _csv_rows(path):
    return [line for line in path.read_text().splitlines() if line and not line.startswith("#")]


def test_run_indexed_keeps_order():
    assert run_indexed(abs, [-3, 1, -2]) == [3, 1, 2]
    assert run_indexed(abs, [-3, 1, -2], threads=2) == [3, 1, 2]
    assert run_indexed(abs, []) == []


def test_q_ratio_recipe(desk_cfg, out_dir):
    result = cmd_q_ratio(desk_cfg, spans=[1, 2], c_points=8, trials=10_000)
    assert result.passed
    assert set(result.gates) == {"N1_within_bounds", "N2_within_bounds"}
    assert result.out_dir.parent == out_dir
    assert result.out_dir.name.startswith("q-ratio-")

    per_c = _csv_rows(result.out_dir / "q_ratio.csv")
    assert per_c[0] == "N,C,q,ci_half_width,lower,upper,defined"
    assert len(per_c) == 1 + 2 * 8
    averaged = _csv_rows(result.out_dir / "q_ratio_avg.csv")
    assert len(averaged) == 3
    assert result.summary["q_avg"][1] == pytest.approx(1.0)

    records = read_records(out_dir / "results.jsonl")
    assert [r["recipe"] for r in records] == ["q-ratio"]
    assert "q_ratio.csv" in records[0]["spectra_files"]


def test_q_ratio_recipe_needs_enough_points(desk_cfg):
    with pytest.raises(ParameterError):
        cmd_q_ratio(desk_cfg, spans=[20], c_points=8, trials=10_000)


def test_link_factor_recipe_from_cache(desk_cfg, tmp_path):
    freqs = sfft.fftfreq(64, d=1.0 / 16.0)
    values = np.where(freqs == 0, 0.0, 1e-4)
    stack = IfStack(per_span=tuple(Spectrum(values=values * (1 + 0.2 * k), freqs=freqs) for k in range(3)))
    cache = write_if_cache(tmp_path / "stack.bin", stack, 16.0)

    result = cmd_link_factor(desk_cfg, 0.4, cache)
    table = result.out_dir / "link_factor.csv"
    text = table.read_text()
    assert "# N: 3" in text
    rows = _csv_rows(table)
    assert rows[0] == "f_GHz,constant,evolving"
    assert len(rows) == 1 + 32
    first = rows[1].split(",")
    assert float(first[0]) == 0.0 and float(first[1]) == 0.0


@pytest.mark.parametrize("preset", ["desk", "paper"])
def test_every_preset_spacing_fits_the_grid(preset, out_dir):
    cfg = load_config(preset=preset)
    base_rate = cfg.channels.sample_rate_ghz
    record_ns = cfg.channels.grid_samples / base_rate
    for spacing in cfg.sweep.spacing_ghz:
        setup = _sweep_setup(cfg, "spacing", spacing)
        setup.plan.check_fits(setup.sample_rate)
        assert setup.n_samples / setup.sample_rate == pytest.approx(record_ns)
        if spacing <= 150:
            assert setup.sample_rate == base_rate
    widest = _sweep_setup(cfg, "spacing", 200.0)
    assert widest.sample_rate == 2 * base_rate
    assert widest.n_samples == 2 * cfg.channels.grid_samples


def test_fit_grid_leaves_fitting_plans_alone(desk_plan):
    assert _fit_grid(desk_plan, 256.0, 1 << 14) == (256.0, 1 << 14)
    assert _fit_grid(desk_plan, 64.0, 1 << 12) == (128.0, 1 << 13)


def _row(power, evolving, constant, *, oracle=None, measured=None, limited=False):
    return BerCurveRow(
        launch_power_dbm=power,
        sigma2_evolving=1e-3,
        sigma2_constant=6e-4,
        snr_rad_db=15.0,
        ber_evolving=evolving,
        ber_constant=constant,
        ber_measured=measured,
        phase_limited=limited,
        ber_oracle=oracle,
    )


def test_ber_gates_pass_on_consistent_rows():
    rows = [
        _row(-4.0, 2e-3, 1.9e-3, oracle=2.1e-3, measured=3e-3),
        _row(0.0, 5e-3, 4e-3, oracle=4.8e-3, measured=6e-3),
        _row(2.0, 8e-2, 6e-2, oracle=7.9e-2, measured=9e-2),
    ]
    gates, counts = _ber_gates(rows)
    assert gates == {
        "quadrature_matches_symbol_oracle": True,
        "constant_below_evolving_above_m1dbm": True,
        "evolving_within_2x_measured": True,
    }
    assert counts == {
        "quadrature_matches_symbol_oracle": 2,
        "constant_below_evolving_above_m1dbm": 2,
        "evolving_within_2x_measured": 2,
    }


def test_ber_gates_flag_each_failure():
    gates, _ = _ber_gates([_row(0.0, 5e-3, 6e-3, oracle=4e-3, measured=1.2e-3)])
    assert gates == {
        "quadrature_matches_symbol_oracle": False,
        "constant_below_evolving_above_m1dbm": False,
        "evolving_within_2x_measured": False,
    }


def test_ber_gates_skip_ineligible_rows():
    rows = [
        _row(-6.0, 1e-6, 1e-6, oracle=1e-6, measured=1e-6),
        _row(4.0, float("nan"), float("nan"), oracle=None, measured=2e-3, limited=True),
    ]
    gates, counts = _ber_gates(rows)
    assert gates == {}
    assert set(counts.values()) == {0}


def test_gap_shrink_compares_sweep_ends():
    assert _gap_shrinks([2.0, 4.0, 8.0, 16.0], [0.30, 0.2, 0.4, 0.1])
    assert not _gap_shrinks([16.0, 2.0], [0.2, 0.1])


def test_symbol_oracle_fills_predicted_rows_only(desk_cfg):
    cfg = desk_cfg.with_section("ber", oracle_symbols=20_000)
    rows = [
        _row(-2.0, 1e-2, 9e-3),
        _row(6.0, float("nan"), float("nan"), limited=True),
    ]
    filled = _with_symbol_oracle(cfg, 16, rows)
    assert filled[0].ber_oracle is not None and 0.0 < filled[0].ber_oracle < 0.1
    assert filled[1].ber_oracle is None
    assert _with_symbol_oracle(cfg, 16, rows)[0].ber_oracle == filled[0].ber_oracle
