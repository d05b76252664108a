"""Experiment configuration schema (JSON, validated with pydantic).

Units follow the field names: the config speaks in mW, um^2 and GHz so the
files read like a lab notebook; `to_*` helpers convert into the canonical
parameter containers.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..errors import ConfigError
from ..propagation.ssfm import StepConfig
from ..signal.field import is_power_of_two
from ..units.params import (
    ChannelPlan,
    FiberParams,
    LinkConfig,
    ProbeSpec,
    SubcarrierSpec,
    subcarrier_offsets,
)

__all__ = [
    "SCHEMA_VERSION",
    "FiberSection",
    "LinkSection",
    "SubcarrierSection",
    "ChannelsSection",
    "ModelSection",
    "StepSection",
    "RunSection",
    "SweepSection",
    "BerSection",
    "QRatioSection",
    "ExperimentConfig",
    "validate_config",
]

SCHEMA_VERSION = 1


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class FiberSection(_Section):
    alpha_db_per_km: float = Field(0.2, ge=0)
    dispersion_ps_nm_km: float = 16.0
    n2_m2_per_w: float = Field(2.6e-20, ge=0)
    a_eff_um2: float = Field(80.0, gt=0)
    span_length_km: float = Field(80.0, gt=0)
    wavelength_nm: float = Field(1550.0, gt=0)

    def to_fiber(self) -> FiberParams:
        return FiberParams(
            alpha_db_per_km=self.alpha_db_per_km,
            dispersion_D=self.dispersion_ps_nm_km,
            n2=self.n2_m2_per_w,
            a_eff=self.a_eff_um2 * 1e-12,
            span_length_L=self.span_length_km,
            ref_wavelength=self.wavelength_nm,
        )


class LinkSection(_Section):
    num_spans: int = Field(1, ge=1)
    amp_gain_db: Optional[float] = Field(None, ge=0)
    amp_noise_figure_db: Optional[float] = None
    dispersion_compensation: Literal["none", "full-at-receiver"] = "full-at-receiver"

    def to_link(self, fiber: FiberParams, num_spans: Optional[int] = None, noise_figure_db: Optional[float] = None) -> LinkConfig:
        return LinkConfig(
            fiber=fiber,
            num_spans_N=num_spans if num_spans is not None else self.num_spans,
            amp_gain_db=self.amp_gain_db,
            amp_noise_figure_db=noise_figure_db if noise_figure_db is not None else self.amp_noise_figure_db,
            dispersion_compensation=self.dispersion_compensation,
        )


class SubcarrierSection(_Section):
    symbol_rate_gbd: float = Field(gt=0)
    rolloff: float = Field(0.05, ge=0, le=1)
    qam_order: int = 16


class ChannelsSection(_Section):
    sample_rate_ghz: float = Field(256.0, gt=0)
    grid_samples: int = Field(1 << 17, ge=1024)
    channel_spacing_ghz: float = Field(50.0, gt=0)
    pump_power_mw: float = Field(1.0, gt=0)
    probe_power_mw: float = Field(0.01, gt=0)
    pump_subcarriers: List[SubcarrierSection] = Field(min_length=1)
    subcarrier_gap_ghz: float = Field(0.25, ge=0)
    probe_kind: Literal["cw", "qam"] = "cw"
    probe_subcarrier: Optional[SubcarrierSection] = None
    probe_filter_ghz: float = Field(12.0, gt=0)

    @field_validator("grid_samples")
    @classmethod
    def _power_of_two(cls, v: int) -> int:
        if not is_power_of_two(v):
            raise ValueError("must be a power of two")
        return v

    @model_validator(mode="after")
    def _probe_shape(self) -> "ChannelsSection":
        if self.probe_kind == "qam" and self.probe_subcarrier is None:
            raise ValueError("probe_kind 'qam' needs probe_subcarrier")
        return self

    def subcarrier_specs(self) -> Tuple[SubcarrierSpec, ...]:
        """Pump subcarriers placed side by side around the pump centre.

        All subcarriers share the first one's symbol rate and roll-off for the
        spacing; each keeps its own QAM order.
        """
        first = self.pump_subcarriers[0]
        offsets = subcarrier_offsets(len(self.pump_subcarriers), first.symbol_rate_gbd, first.rolloff, self.subcarrier_gap_ghz)
        return tuple(
            SubcarrierSpec(symbol_rate=s.symbol_rate_gbd, rolloff=s.rolloff, center_offset=o, qam_order=s.qam_order)
            for s, o in zip(self.pump_subcarriers, offsets)
        )

    def to_plan(self, *, pump_power_mw: Optional[float] = None, probe_power_mw: Optional[float] = None, spacing_ghz: Optional[float] = None) -> ChannelPlan:
        probe_subs: Tuple[SubcarrierSpec, ...] = ()
        if self.probe_kind == "qam" and self.probe_subcarrier is not None:
            p = self.probe_subcarrier
            probe_subs = (SubcarrierSpec(symbol_rate=p.symbol_rate_gbd, rolloff=p.rolloff, qam_order=p.qam_order),)
        probe = ProbeSpec(
            kind=self.probe_kind,
            power=(probe_power_mw if probe_power_mw is not None else self.probe_power_mw) * 1e-3,
            subcarriers=probe_subs,
        )
        return ChannelPlan.symmetric(
            spacing_ghz if spacing_ghz is not None else self.channel_spacing_ghz,
            self.subcarrier_specs(),
            pump_power=(pump_power_mw if pump_power_mw is not None else self.pump_power_mw) * 1e-3,
            probe=probe,
        )


class ModelSection(_Section):
    k_mode: Literal["coherent", "incoherent"] = "incoherent"
    if_mode: Literal["constant", "evolving", "both"] = "both"
    band: Literal["nyquist", "full"] = "nyquist"
    quadrature_points: int = Field(33, ge=2)
    single_shot: bool = False


class StepSection(_Section):
    step_km: float = Field(0.1, gt=0)
    mode: Literal["fixed", "logarithmic"] = "fixed"

    def to_step(self) -> StepConfig:
        return StepConfig(step_km=self.step_km, mode=self.mode)


class RunSection(_Section):
    realizations: int = Field(8, ge=1)
    seed: int = Field(1, ge=0, lt=1 << 64)
    threads: Optional[int] = Field(None, ge=1)
    out_dir: Optional[str] = None
    spectrum_band_ghz: float = Field(0.25, gt=0)
    compare_f_lo_ghz: float = Field(0.5, ge=0)
    compare_f_hi_ghz: float = Field(16.0, gt=0)


class SweepSection(_Section):
    distance_spans: List[int] = Field(default_factory=lambda: [1, 2, 3, 5, 7, 10])
    dispersion_ps_nm_km: List[float] = Field(default_factory=lambda: [2.0, 4.0, 8.0, 16.0])
    spacing_ghz: List[float] = Field(default_factory=lambda: [50.0, 75.0, 100.0, 150.0, 200.0])
    power_offsets_db: List[float] = Field(default_factory=lambda: [-5.0, -2.5, 0.0, 2.5, 5.0])


class BerSection(_Section):
    powers_dbm: List[float] = Field(default_factory=lambda: [-16.0, -14.0, -12.0, -10.0, -8.0, -6.0, -4.0, -2.0, 0.0, 2.0, 4.0])
    num_spans: int = Field(10, ge=1)
    noise_figure_db: float = 5.0
    probe_subcarrier: SubcarrierSection = SubcarrierSection(symbol_rate_gbd=8.0, rolloff=0.05, qam_order=16)
    quadrature_nodes: int = Field(64, ge=16)
    oracle_symbols: int = Field(4_000_000, ge=1000)


class QRatioSection(_Section):
    spans: List[int] = Field(default_factory=lambda: [1, 2, 5, 20, 50])
    c_points: int = Field(128, ge=2)
    trials: int = Field(20_000, ge=10_000)


class ExperimentConfig(_Section):
    schema_version: Literal[1]
    fiber: FiberSection
    link: LinkSection
    channels: ChannelsSection
    model: ModelSection
    step: StepSection
    run: RunSection
    sweep: SweepSection = SweepSection()
    ber: BerSection = BerSection()
    q_ratio: QRatioSection = QRatioSection()

    def resolved(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")

    def config_hash(self) -> str:
        """sha256 of the canonical resolved config; run-placement keys excluded."""
        data = self.resolved()
        data["run"] = {k: v for k, v in data["run"].items() if k not in ("out_dir", "threads")}
        canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def with_section(self, section: str, **changes: Any) -> "ExperimentConfig":
        """Re-validated copy with keys of one section replaced; None values are ignored."""
        data = self.resolved()
        if section not in data or not isinstance(data[section], dict):
            raise ConfigError("invalid override", [(section, "unknown config section")])
        data[section].update({k: v for k, v in changes.items() if v is not None})
        return validate_config(data)

    def with_overrides(self, **run_changes: Any) -> "ExperimentConfig":
        """Apply CLI overrides: `if_mode` and `k_mode` go to `model`, the rest to `run`."""
        changes = {k: v for k, v in run_changes.items() if v is not None}
        model_keys = {k: changes.pop(k) for k in ("if_mode", "k_mode") if k in changes}
        return self.with_section("model", **model_keys).with_section("run", **changes)


def _diagnostics(exc: ValidationError) -> List[Tuple[str, str]]:
    out = []
    for err in exc.errors():
        path = ".".join(str(p) for p in err.get("loc", ())) or "<root>"
        out.append((path, err.get("msg", "invalid value")))
    return out


def validate_config(data: Dict[str, Any]) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError("invalid experiment config", _diagnostics(exc)) from exc
