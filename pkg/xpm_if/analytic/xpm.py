"""Analytic XPM phase spectrum of a CW probe driven by pump intensity fluctuations.

Frequencies are GHz, walk-off D*dlambda is ps/km, so omega*D*dlambda uses
omega in rad/ps (GHZ_TO_RAD_PER_PS) and f*D*dlambda*L carries a 1e-3.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Literal, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from ..constants.physics import GHZ_TO_RAD_PER_PS, K_COHERENT, K_INCOHERENT
from ..errors import ParameterError
from ..propagation.spectra import IfStack, Spectrum
from ..units.params import ChannelPlan, FiberParams, spacing_to_delta_lambda

__all__ = [
    "KMode",
    "IfMode",
    "XpmModelConfig",
    "PhaseSpectrum",
    "delta_lambda_ranges",
    "xpm_efficiency",
    "link_factor",
    "phasor_sum",
    "single_tone_phase_amplitude",
    "passband_phase_spectrum",
    "phase_variance",
    "fixed_delta_lambda_response",
    "model_for_plan",
]

logger = logging.getLogger(__name__)

KMode = Literal["coherent", "incoherent"]
IfMode = Literal["constant", "evolving"]

# |sin(pi f D dlambda L)| below this is treated as a peak of the link factor.
_SIN_SINGULAR = 1e-9


def _walkoff_cycles(f: np.ndarray, delta_lambda: float, dispersion: float, length: float) -> np.ndarray:
    """f * D * dlambda * L, dimensionless (GHz * ps)."""
    return np.abs(f) * dispersion * delta_lambda * length * 1e-3


@dataclass(frozen=True)
class XpmModelConfig:
    """Inputs of the pass-band averaged model.

    `delta_lambda_ranges` holds one (low, high) nm pair per pump subcarrier.
    A single-span model is always coherent.
    """

    fiber: FiberParams
    num_spans_N: int = 1
    k_mode: KMode = "incoherent"
    if_mode: IfMode = "evolving"
    delta_lambda_ranges: Tuple[Tuple[float, float], ...] = ((0.3, 0.5),)
    frequency_grid: Optional[np.ndarray] = None
    delta_lambda_quadrature_points: int = 33

    def __post_init__(self) -> None:
        if int(self.num_spans_N) < 1:
            raise ParameterError(f"num_spans_N must be >= 1, got {self.num_spans_N}")
        if self.k_mode not in ("coherent", "incoherent"):
            raise ParameterError(f"unknown k_mode {self.k_mode!r}")
        if self.if_mode not in ("constant", "evolving"):
            raise ParameterError(f"unknown if_mode {self.if_mode!r}")
        if self.delta_lambda_quadrature_points < 2:
            raise ParameterError("delta_lambda_quadrature_points must be >= 2")
        ranges = tuple((float(lo), float(hi)) for lo, hi in self.delta_lambda_ranges)
        if not ranges:
            raise ParameterError("at least one delta-lambda range is required")
        for lo, hi in ranges:
            if not hi > lo > 0:
                raise ParameterError(f"delta-lambda range needs high > low > 0 nm, got ({lo}, {hi})")
        object.__setattr__(self, "delta_lambda_ranges", ranges)
        if self.num_spans_N == 1 and self.k_mode != "coherent":
            object.__setattr__(self, "k_mode", "coherent")

    @property
    def k_factor(self) -> float:
        return K_COHERENT if self.k_mode == "coherent" else K_INCOHERENT

    def with_mode(self, if_mode: IfMode) -> "XpmModelConfig":
        return XpmModelConfig(
            fiber=self.fiber,
            num_spans_N=self.num_spans_N,
            k_mode=self.k_mode,
            if_mode=if_mode,
            delta_lambda_ranges=self.delta_lambda_ranges,
            frequency_grid=self.frequency_grid,
            delta_lambda_quadrature_points=self.delta_lambda_quadrature_points,
        )


@dataclass(frozen=True)
class PhaseSpectrum:
    """sigma'_phi(f): phase amplitude per tone, rad, DC bin zero."""

    values: np.ndarray
    freqs: np.ndarray
    provenance: Literal["analytic", "measured"] = "analytic"
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=np.float64)
        f = np.asarray(self.freqs, dtype=np.float64)
        if v.shape != f.shape:
            raise ParameterError("phase spectrum values and freqs differ in shape")
        if np.any(v < 0):
            raise ParameterError("phase spectrum values must be nonnegative")
        v[f == 0] = 0.0
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "freqs", f)

    def variance(self) -> float:
        return float(np.sum(self.values**2))

    def as_spectrum(self, label: str = "") -> Spectrum:
        prov = "analytic" if self.provenance == "analytic" else "measured"
        return Spectrum(values=self.values, freqs=self.freqs, provenance=prov, label=label)


def delta_lambda_ranges(
    plan: ChannelPlan, wavelength_nm: float, *, full_band: bool = False
) -> Tuple[Tuple[float, float], ...]:
    """Per-subcarrier wavelength separation from the probe.

    The Nyquist band (width R) is used unless `full_band`, which adds the
    roll-off excess R * beta.
    """
    out = []
    for sc in plan.pump_subcarriers:
        centre = abs(plan.pump_center_offset + sc.center_offset - plan.probe_center_offset)
        width = sc.occupied_bandwidth if full_band else sc.symbol_rate
        lo = centre - 0.5 * width
        hi = centre + 0.5 * width
        if lo <= 0:
            raise ParameterError("a pump subcarrier overlaps the probe wavelength")
        out.append((spacing_to_delta_lambda(lo, wavelength_nm), spacing_to_delta_lambda(hi, wavelength_nm)))
    return tuple(out)


def xpm_efficiency(f: np.ndarray | float, delta_lambda: float, fiber: FiberParams) -> np.ndarray:
    """eta_XPM of one span for a probe `delta_lambda` nm away from the pump.

    eta = |int_0^L exp(-alpha z - i omega D dlambda z) dz|^2 / L_eff^2
    """
    f_arr = np.abs(np.asarray(f, dtype=np.float64))
    alpha = fiber.alpha_linear
    length = fiber.span_length_L
    x = GHZ_TO_RAD_PER_PS * f_arr * fiber.dispersion_D * delta_lambda  # 1/km
    if alpha <= 0:
        # Lossless: |int e^{-ixz}|^2 / L^2 = sinc^2(xL/2); np.sinc is sin(pi u)/(pi u).
        return np.sinc(x * length / (2.0 * np.pi)) ** 2
    decay = math.exp(-alpha * length)
    envelope = alpha**2 / (alpha**2 + x**2)
    ripple = 4.0 * np.sin(0.5 * x * length) ** 2 * decay / (1.0 - decay) ** 2
    return envelope * (1.0 + ripple)


def link_factor(
    f: np.ndarray | float, delta_lambda: float, num_spans: int, span_length: float, dispersion: float
) -> np.ndarray:
    """|sin(pi N u) / sin(pi u)| with u = f D dlambda L; N at the peaks."""
    if num_spans < 1:
        raise ParameterError(f"num_spans must be >= 1, got {num_spans}")
    f_arr = np.asarray(f, dtype=np.float64)
    u = np.atleast_1d(_walkoff_cycles(f_arr, delta_lambda, dispersion, span_length))
    den = np.sin(np.pi * u)
    num = np.sin(np.pi * num_spans * u)
    out = np.empty_like(u)
    peak = np.abs(den) < _SIN_SINGULAR
    out[~peak] = np.abs(num[~peak] / den[~peak])
    # L'Hopital: N cos(pi N u) / cos(pi u) -> N at integer u.
    out[peak] = np.abs(num_spans * np.cos(np.pi * num_spans * u[peak]) / np.cos(np.pi * u[peak]))
    return out.reshape(f_arr.shape)


def _span_amplitudes(if_stack: IfStack, num_spans: int, mode: IfMode, freqs: Optional[np.ndarray]) -> np.ndarray:
    if len(if_stack) < num_spans:
        raise ParameterError(f"IF stack holds {len(if_stack)} spans, model needs {num_spans}")
    spectra = if_stack.per_span[:num_spans]
    if mode == "constant":
        spectra = tuple(spectra[0] for _ in range(num_spans))
    if freqs is None:
        return np.vstack([s.values for s in spectra])
    # Off-grid frequencies are linearly interpolated.
    return np.vstack([s.at(freqs) for s in spectra])


def _phasor_magnitude(amps: np.ndarray, f: np.ndarray, delta_lambda: float, fiber: FiberParams) -> np.ndarray:
    n = amps.shape[0]
    if n == 1:
        return amps[0].copy()
    u = _walkoff_cycles(f, delta_lambda, fiber.dispersion_D, fiber.span_length_L)
    k = np.arange(n)[:, None]
    return np.abs(np.sum(amps * np.exp(-2j * np.pi * u[None, :] * k), axis=0))


def phasor_sum(
    f: np.ndarray,
    delta_lambda: float,
    if_stack: IfStack,
    mode: IfMode,
    fiber: FiberParams,
    num_spans: int,
) -> np.ndarray:
    """|upsilon'(f)| in W: span IF amplitudes summed with walk-off phasors."""
    freqs = np.asarray(f, dtype=np.float64)
    on_grid = freqs.shape == if_stack.freqs.shape and np.array_equal(freqs, if_stack.freqs)
    amps = _span_amplitudes(if_stack, num_spans, mode, None if on_grid else freqs)
    if mode == "constant":
        return amps[0] * link_factor(freqs, delta_lambda, num_spans, fiber.span_length_L, fiber.dispersion_D)
    return _phasor_magnitude(amps, freqs, delta_lambda, fiber)


def single_tone_phase_amplitude(
    f: np.ndarray | float,
    delta_lambda: float,
    pump_if_amplitude: np.ndarray | float,
    fiber: FiberParams,
) -> np.ndarray:
    """2 gamma L_eff sqrt(eta) |P| (or |upsilon| for a multi-span sum), rad."""
    amp = np.asarray(pump_if_amplitude, dtype=np.float64)
    if np.any(amp < 0):
        raise ParameterError("pump IF amplitude must be nonnegative")
    eta = xpm_efficiency(f, delta_lambda, fiber)
    return 2.0 * fiber.gamma * fiber.effective_length * np.sqrt(eta) * amp


def fixed_delta_lambda_response(
    f: np.ndarray,
    delta_lambda: float,
    if_stack: IfStack,
    fiber: FiberParams,
    num_spans: int,
    mode: IfMode = "evolving",
) -> np.ndarray:
    upsilon = phasor_sum(f, delta_lambda, if_stack, mode, fiber, num_spans)
    return single_tone_phase_amplitude(f, delta_lambda, upsilon, fiber)


# Frequency bins per block when the delta-lambda integrand is stacked.
_FREQ_BLOCK = 1 << 16


def _phase_at(model: XpmModelConfig, amps: np.ndarray, freqs: np.ndarray, delta_lambda: float) -> np.ndarray:
    if model.if_mode == "constant":
        upsilon = amps[0] * link_factor(
            freqs, delta_lambda, model.num_spans_N, model.fiber.span_length_L, model.fiber.dispersion_D
        )
    else:
        upsilon = _phasor_magnitude(amps, freqs, delta_lambda, model.fiber)
    return single_tone_phase_amplitude(freqs, delta_lambda, upsilon, model.fiber)


def _range_integral(model: XpmModelConfig, amps: np.ndarray, freqs: np.ndarray, lo: float, hi: float) -> np.ndarray:
    nodes = np.linspace(lo, hi, model.delta_lambda_quadrature_points)
    out = np.empty(freqs.shape, dtype=np.float64)
    for start in range(0, freqs.size, _FREQ_BLOCK):
        block = slice(start, start + _FREQ_BLOCK)
        rows = np.vstack([_phase_at(model, amps[:, block], freqs[block], dl) for dl in nodes])
        out[block] = integrate.trapezoid(rows, nodes, axis=0)
    return out


def passband_phase_spectrum(model: XpmModelConfig, if_stack: IfStack, *, k_weighted: bool = False) -> PhaseSpectrum:
    """sigma'_phi(f) averaged over the pump's delta-lambda ranges.

    The integrals over every subcarrier range are added and divided by the
    summed range widths. With `k_weighted` the values carry sqrt(K), so their
    squares sum to the model variance.
    """
    freqs = if_stack.freqs if model.frequency_grid is None else np.asarray(model.frequency_grid, dtype=np.float64)
    freqs = np.atleast_1d(freqs)
    on_grid = model.frequency_grid is None
    amps = _span_amplitudes(if_stack, model.num_spans_N, model.if_mode, None if on_grid else freqs)

    acc = np.zeros(freqs.shape, dtype=np.float64)
    total_width = 0.0
    for lo, hi in model.delta_lambda_ranges:
        acc += _range_integral(model, amps, freqs, lo, hi)
        total_width += hi - lo

    values = acc / total_width
    if k_weighted:
        values = values * math.sqrt(model.k_factor)
    logger.debug(
        "pass-band phase spectrum: %d bins, %d ranges, mode=%s",
        freqs.size,
        len(model.delta_lambda_ranges),
        model.if_mode,
    )
    return PhaseSpectrum(
        values=values,
        freqs=freqs,
        provenance="analytic",
        metadata={
            "if_mode": model.if_mode,
            "k_mode": model.k_mode,
            "num_spans": model.num_spans_N,
            "k_weighted": k_weighted,
        },
    )


def phase_variance(model: XpmModelConfig, if_stack: IfStack, *, band_limit_ghz: Optional[float] = None) -> float:
    """K * sum over non-DC bins of sigma'_phi(f)^2, rad^2.

    `band_limit_ghz` keeps only |f| <= limit, matching a filtered measurement.
    """
    spectrum = passband_phase_spectrum(model, if_stack, k_weighted=True)
    values = spectrum.values
    if band_limit_ghz is not None:
        values = np.where(np.abs(spectrum.freqs) <= band_limit_ghz, values, 0.0)
    return float(np.sum(values**2))


def model_for_plan(
    fiber: FiberParams,
    plan: ChannelPlan,
    num_spans: int,
    *,
    k_mode: KMode = "incoherent",
    if_mode: IfMode = "evolving",
    full_band: bool = False,
    quadrature_points: int = 33,
    frequency_grid: Optional[Sequence[float]] = None,
) -> XpmModelConfig:
    return XpmModelConfig(
        fiber=fiber,
        num_spans_N=num_spans,
        k_mode=k_mode,
        if_mode=if_mode,
        delta_lambda_ranges=delta_lambda_ranges(plan, fiber.ref_wavelength, full_band=full_band),
        frequency_grid=None if frequency_grid is None else np.asarray(frequency_grid, dtype=np.float64),
        delta_lambda_quadrature_points=quadrature_points,
    )
