"""Physical parameter containers and unit conversions.

All values are kept in the toolkit's canonical units (km, W, GHz, nm, ps^2/km,
rad). Derived quantities such as gamma and beta2 are properties computed from
the raw fields on every access.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Literal, Optional, Tuple

from ..constants.physics import REFERENCE_WAVELENGTH_NM, SPEED_OF_LIGHT_M_S
from ..errors import ParameterError

__all__ = [
    "attenuation_to_linear",
    "effective_length",
    "nonlinear_coefficient",
    "dispersion_to_beta2",
    "beta2_to_dispersion",
    "spacing_to_delta_lambda",
    "delta_lambda_to_spacing",
    "subcarrier_offsets",
    "FiberParams",
    "LinkConfig",
    "SubcarrierSpec",
    "ProbeSpec",
    "ChannelPlan",
]

# c in nm/ps (1 m/s = 1e-3 nm/ps) and nm*GHz (1 m/s = 1e9 nm/s = 1 nm*GHz).
_C_NM_PER_PS = SPEED_OF_LIGHT_M_S * 1e-3
_C_NM_GHZ = SPEED_OF_LIGHT_M_S


def attenuation_to_linear(alpha_db_per_km: float) -> float:
    """dB/km -> 1/km (power attenuation coefficient)."""
    if alpha_db_per_km < 0:
        raise ParameterError(f"attenuation must be >= 0 dB/km, got {alpha_db_per_km}")
    return float(alpha_db_per_km) * math.log(10.0) / 10.0


def effective_length(alpha_linear: float, length_km: float) -> float:
    if length_km <= 0:
        raise ParameterError(f"length must be > 0 km, got {length_km}")
    if alpha_linear <= 0:
        return float(length_km)
    if math.isinf(length_km):
        return 1.0 / alpha_linear
    return -math.expm1(-alpha_linear * length_km) / alpha_linear


def nonlinear_coefficient(n2: float, a_eff: float, wavelength_nm: float) -> float:
    """gamma = 2 pi n2 / (lambda A_eff), returned in 1/(W km).

    `n2` in m^2/W, `a_eff` in m^2, `wavelength_nm` in nm.
    """
    if n2 <= 0 or a_eff <= 0 or wavelength_nm <= 0:
        raise ParameterError("n2, a_eff and wavelength must all be > 0")
    per_w_per_m = 2.0 * math.pi * n2 / (wavelength_nm * 1e-9 * a_eff)
    return per_w_per_m * 1e3


def dispersion_to_beta2(dispersion_ps_nm_km: float, wavelength_nm: float) -> float:
    """D [ps/(nm km)] -> beta2 [ps^2/km] via beta2 = -D lambda^2 / (2 pi c)."""
    if wavelength_nm <= 0:
        raise ParameterError(f"wavelength must be > 0 nm, got {wavelength_nm}")
    return -dispersion_ps_nm_km * wavelength_nm**2 / (2.0 * math.pi * _C_NM_PER_PS)


def beta2_to_dispersion(beta2_ps2_km: float, wavelength_nm: float) -> float:
    if wavelength_nm <= 0:
        raise ParameterError(f"wavelength must be > 0 nm, got {wavelength_nm}")
    return -beta2_ps2_km * 2.0 * math.pi * _C_NM_PER_PS / wavelength_nm**2


def spacing_to_delta_lambda(freq_spacing_ghz: float, wavelength_nm: float) -> float:
    """Frequency separation [GHz] -> wavelength separation [nm]."""
    if wavelength_nm <= 0:
        raise ParameterError(f"wavelength must be > 0 nm, got {wavelength_nm}")
    return wavelength_nm**2 * freq_spacing_ghz / _C_NM_GHZ


def delta_lambda_to_spacing(delta_lambda_nm: float, wavelength_nm: float) -> float:
    if wavelength_nm <= 0:
        raise ParameterError(f"wavelength must be > 0 nm, got {wavelength_nm}")
    return delta_lambda_nm * _C_NM_GHZ / wavelength_nm**2


def subcarrier_offsets(count: int, symbol_rate_ghz: float, rolloff: float, gap_ghz: float) -> Tuple[float, ...]:
    """Centre offsets of `count` equally spaced subcarriers around 0 GHz.

    Spacing is R (1 + beta) + gap, so adjacent shaped spectra leave a `gap_ghz`
    hole between their absolute band edges.
    """
    if count < 1:
        raise ParameterError("subcarrier count must be >= 1")
    spacing = symbol_rate_ghz * (1.0 + rolloff) + gap_ghz
    first = -0.5 * (count - 1) * spacing
    return tuple(first + i * spacing for i in range(count))


@dataclass(frozen=True, slots=True)
class FiberParams:
    alpha_db_per_km: float = 0.2
    dispersion_D: float = 16.0
    n2: float = 2.6e-20
    a_eff: float = 80e-12
    span_length_L: float = 80.0
    ref_wavelength: float = REFERENCE_WAVELENGTH_NM

    def __post_init__(self) -> None:
        if self.alpha_db_per_km < 0:
            raise ParameterError(f"alpha_db_per_km must be >= 0, got {self.alpha_db_per_km}")
        if self.a_eff <= 0:
            raise ParameterError(f"a_eff must be > 0, got {self.a_eff}")
        if self.span_length_L <= 0:
            raise ParameterError(f"span_length_L must be > 0, got {self.span_length_L}")
        if self.ref_wavelength <= 0:
            raise ParameterError(f"ref_wavelength must be > 0, got {self.ref_wavelength}")
        if self.n2 < 0:
            raise ParameterError(f"n2 must be >= 0, got {self.n2}")

    @property
    def alpha_linear(self) -> float:
        return attenuation_to_linear(self.alpha_db_per_km)

    @property
    def gamma(self) -> float:
        # n2 = 0 is how a linear (XPM-free) fiber is expressed.
        if self.n2 == 0:
            return 0.0
        return nonlinear_coefficient(self.n2, self.a_eff, self.ref_wavelength)

    @property
    def beta2(self) -> float:
        return dispersion_to_beta2(self.dispersion_D, self.ref_wavelength)

    @property
    def effective_length(self) -> float:
        return effective_length(self.alpha_linear, self.span_length_L)

    @property
    def span_loss_db(self) -> float:
        return self.alpha_db_per_km * self.span_length_L

    def with_overrides(self, **changes: float) -> "FiberParams":
        return replace(self, **changes)


DispersionCompensation = Literal["none", "full-at-receiver"]


@dataclass(frozen=True, slots=True)
class LinkConfig:
    """N identical spans, each followed by a flat-gain amplifier.

    `amp_gain_db=None` means transparent: the gain equals the span loss.
    `amp_noise_figure_db=None` disables ASE.
    """

    fiber: FiberParams
    num_spans_N: int = 1
    amp_gain_db: Optional[float] = None
    amp_noise_figure_db: Optional[float] = None
    dispersion_compensation: DispersionCompensation = "full-at-receiver"

    def __post_init__(self) -> None:
        if int(self.num_spans_N) < 1:
            raise ParameterError(f"num_spans_N must be >= 1, got {self.num_spans_N}")
        if self.amp_gain_db is not None and self.amp_gain_db < 0:
            raise ParameterError(f"amp_gain_db must be >= 0, got {self.amp_gain_db}")
        if self.dispersion_compensation not in ("none", "full-at-receiver"):
            raise ParameterError(f"unknown dispersion_compensation {self.dispersion_compensation!r}")

    @property
    def gain_db(self) -> float:
        if self.amp_gain_db is None:
            return self.fiber.span_loss_db
        return float(self.amp_gain_db)

    @property
    def is_transparent(self) -> bool:
        return math.isclose(self.gain_db, self.fiber.span_loss_db, rel_tol=1e-12, abs_tol=1e-12)

    @property
    def accumulated_dispersion_ps_nm(self) -> float:
        return self.fiber.dispersion_D * self.fiber.span_length_L * self.num_spans_N

    @classmethod
    def transparent(
        cls, fiber: FiberParams, num_spans: int, noise_figure_db: Optional[float] = None
    ) -> "LinkConfig":
        return cls(
            fiber=fiber,
            num_spans_N=num_spans,
            amp_gain_db=fiber.span_loss_db,
            amp_noise_figure_db=noise_figure_db,
        )


@dataclass(frozen=True, slots=True)
class SubcarrierSpec:
    symbol_rate: float
    rolloff: float = 0.05
    center_offset: float = 0.0
    qam_order: int = 16

    def __post_init__(self) -> None:
        if self.symbol_rate <= 0:
            raise ParameterError(f"symbol_rate must be > 0 GHz, got {self.symbol_rate}")
        if not 0.0 <= self.rolloff <= 1.0:
            raise ParameterError(f"rolloff must be in [0, 1], got {self.rolloff}")

    @property
    def occupied_bandwidth(self) -> float:
        return self.symbol_rate * (1.0 + self.rolloff)


@dataclass(frozen=True, slots=True)
class ProbeSpec:
    kind: Literal["cw", "qam"] = "cw"
    power: float = 1e-5
    subcarriers: Tuple[SubcarrierSpec, ...] = ()

    def __post_init__(self) -> None:
        if self.power <= 0:
            raise ParameterError(f"probe power must be > 0 W, got {self.power}")
        if self.kind == "qam" and not self.subcarriers:
            raise ParameterError("a qam probe needs at least one subcarrier")
        if self.kind not in ("cw", "qam"):
            raise ParameterError(f"unknown probe kind {self.kind!r}")


@dataclass(frozen=True, slots=True)
class ChannelPlan:
    """Pump and probe placement on the shared simulation band.

    Offsets are relative to the simulation band centre; subcarrier offsets are
    relative to the pump (or probe) centre.
    """

    pump_center_offset: float
    probe_center_offset: float
    channel_spacing: float
    pump_subcarriers: Tuple[SubcarrierSpec, ...]
    pump_power: float = 1e-3
    probe: ProbeSpec = field(default_factory=ProbeSpec)

    def __post_init__(self) -> None:
        if not self.pump_subcarriers:
            raise ParameterError("pump needs at least one subcarrier")
        gap = abs(self.pump_center_offset - self.probe_center_offset)
        if not math.isclose(gap, self.channel_spacing, rel_tol=1e-9, abs_tol=1e-9):
            raise ParameterError(
                f"|pump - probe| = {gap} GHz does not match channel_spacing {self.channel_spacing} GHz"
            )
        if self.pump_power <= 0:
            raise ParameterError(f"pump_power must be > 0 W, got {self.pump_power}")

    @classmethod
    def symmetric(
        cls,
        channel_spacing: float,
        pump_subcarriers: Tuple[SubcarrierSpec, ...],
        pump_power: float = 1e-3,
        probe: Optional[ProbeSpec] = None,
    ) -> "ChannelPlan":
        """Pump above and probe below the band centre, half a spacing each."""
        return cls(
            pump_center_offset=0.5 * channel_spacing,
            probe_center_offset=-0.5 * channel_spacing,
            channel_spacing=channel_spacing,
            pump_subcarriers=tuple(pump_subcarriers),
            pump_power=pump_power,
            probe=probe or ProbeSpec(),
        )

    @property
    def pump_band(self) -> Tuple[float, float]:
        """(low, high) absolute band edges of the whole pump, GHz."""
        lows = [self.pump_center_offset + s.center_offset - 0.5 * s.occupied_bandwidth for s in self.pump_subcarriers]
        highs = [self.pump_center_offset + s.center_offset + 0.5 * s.occupied_bandwidth for s in self.pump_subcarriers]
        return min(lows), max(highs)

    @property
    def probe_band(self) -> Tuple[float, float]:
        if self.probe.kind == "cw":
            return self.probe_center_offset, self.probe_center_offset
        lows = [self.probe_center_offset + s.center_offset - 0.5 * s.occupied_bandwidth for s in self.probe.subcarriers]
        highs = [self.probe_center_offset + s.center_offset + 0.5 * s.occupied_bandwidth for s in self.probe.subcarriers]
        return min(lows), max(highs)

    def check_fits(self, sample_rate: float) -> None:
        """Every band edge must stay inside 90% of the Nyquist half-band."""
        limit = 0.9 * 0.5 * sample_rate
        for lo, hi in (self.pump_band, self.probe_band):
            if lo < -limit or hi > limit:
                raise ParameterError(
                    f"band [{lo:.3f}, {hi:.3f}] GHz exceeds the guarded simulation band +-{limit:.3f} GHz"
                )

    def with_spacing(self, channel_spacing: float) -> "ChannelPlan":
        return replace(
            self,
            pump_center_offset=0.5 * channel_spacing,
            probe_center_offset=-0.5 * channel_spacing,
            channel_spacing=channel_spacing,
        )
