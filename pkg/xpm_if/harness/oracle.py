"""SSFM experiments that the analytic model is checked against.

Each realization is a pure function of (OracleSetup, realization index) so the
realizations can be farmed out to worker processes.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..analytic.xpm import PhaseSpectrum, single_tone_phase_amplitude
from ..errors import ParameterError
from ..metrics.evm import SnrEstimate, align_to_reference, estimate_snr
from ..metrics.phase import PhaseSeries, extract_phase, phase_psd, phase_variance_measured, tone_amplitude
from ..propagation.link import BandTap, compensate_link, propagate_link, pump_tap_for
from ..propagation.metrics import propagation_metrics_context
from ..propagation.receiver import bandpass_filter
from ..propagation.spectra import IfStack, Spectrum, amplitude_statistics
from ..propagation.ssfm import StepConfig
from ..signal.field import SampledField, cw_probe, multiplex
from ..signal.qam import ConstellationSpec
from ..signal.shaping import generate_subcarrier, rrc_matched_filter
from ..units.params import ChannelPlan, FiberParams, LinkConfig, spacing_to_delta_lambda
from ..util.seeds import derive_seed, realization_seed
from .pool import run_indexed

__all__ = [
    "OracleSetup",
    "RealizationResult",
    "OracleRun",
    "ToneCheck",
    "make_pump",
    "make_probe",
    "two_tone_pump",
    "run_realization",
    "run_oracle",
    "single_tone_oracle",
]

logger = logging.getLogger(__name__)

_PUMP_STREAM = 1
_PROBE_STREAM = 2
_ASE_STREAM = 3


@dataclass(frozen=True)
class OracleSetup:
    link: LinkConfig
    plan: ChannelPlan
    step: StepConfig
    sample_rate: float
    n_samples: int
    probe_filter_ghz: float
    master_seed: int = 1

    def __post_init__(self) -> None:
        self.plan.check_fits(self.sample_rate)

    @property
    def fiber(self) -> FiberParams:
        return self.link.fiber


@dataclass(frozen=True)
class RealizationResult:
    index: int
    seed: int
    if_spectra: Tuple[Spectrum, ...]
    phase: Optional[PhaseSeries] = None
    rx_symbols: Optional[np.ndarray] = None
    tx_labels: Optional[np.ndarray] = None
    counters: Dict[str, float] = field(default_factory=dict)


def make_pump(plan: ChannelPlan, n_samples: int, sample_rate: float, seed: int) -> SampledField:
    """QAM subcarriers sharing the pump power equally, multiplexed at the pump centre."""
    share = plan.pump_power / len(plan.pump_subcarriers)
    parts = []
    for idx, sc in enumerate(plan.pump_subcarriers):
        parts.append(
            generate_subcarrier(
                ConstellationSpec(sc.qam_order),
                sc.symbol_rate,
                sc.rolloff,
                n_samples,
                sample_rate,
                share,
                derive_seed(seed, _PUMP_STREAM, idx),
                center_offset=plan.pump_center_offset + sc.center_offset,
            )
        )
    return multiplex(parts, description="pump")


def make_probe(plan: ChannelPlan, n_samples: int, sample_rate: float, seed: int) -> SampledField:
    if plan.probe.kind == "cw":
        return cw_probe(plan.probe.power, n_samples, sample_rate, plan.probe_center_offset)
    sc = plan.probe.subcarriers[0]
    return generate_subcarrier(
        ConstellationSpec(sc.qam_order),
        sc.symbol_rate,
        sc.rolloff,
        n_samples,
        sample_rate,
        plan.probe.power,
        derive_seed(seed, _PROBE_STREAM),
        center_offset=plan.probe_center_offset + sc.center_offset,
    )


def two_tone_pump(power: float, beat_ghz: float, center_offset: float, n_samples: int, sample_rate: float) -> SampledField:
    """Two equal CW lines `beat_ghz` apart: p(t) = P (1 + cos(2 pi f t)), |P(f)| = P / 2."""
    lines = [
        cw_probe(0.5 * power, n_samples, sample_rate, center_offset - 0.5 * beat_ghz),
        cw_probe(0.5 * power, n_samples, sample_rate, center_offset + 0.5 * beat_ghz),
    ]
    return multiplex(lines, description=f"two-tone pump {beat_ghz:g} GHz")


def _receive(setup: OracleSetup, out: SampledField) -> SampledField:
    rx = compensate_link(out, setup.link)
    return bandpass_filter(rx, setup.plan.probe_center_offset, setup.probe_filter_ghz)


def run_realization(setup: OracleSetup, index: int) -> RealizationResult:
    seed = realization_seed(setup.master_seed, index)
    pump = make_pump(setup.plan, setup.n_samples, setup.sample_rate, seed)
    probe = make_probe(setup.plan, setup.n_samples, setup.sample_rate, seed)
    tx = multiplex([pump, probe], description="pump+probe")

    with propagation_metrics_context() as counters:
        out, stack = propagate_link(
            tx, setup.link, pump_tap_for(setup.plan), step=setup.step, seed=derive_seed(seed, _ASE_STREAM)
        )
    probe_rx = _receive(setup, out)

    if setup.plan.probe.kind == "cw":
        return RealizationResult(
            index=index,
            seed=seed,
            if_spectra=stack.per_span if stack is not None else (),
            phase=extract_phase(probe_rx),
            counters=counters.as_dict(),
        )

    sc = setup.plan.probe.subcarriers[0]
    rx_symbols = rrc_matched_filter(probe_rx, sc.symbol_rate, sc.rolloff)
    labels = probe.metadata["labels"]
    tx_symbols = ConstellationSpec(sc.qam_order).modulate(labels)
    return RealizationResult(
        index=index,
        seed=seed,
        if_spectra=stack.per_span if stack is not None else (),
        rx_symbols=align_to_reference(rx_symbols, tx_symbols),
        tx_labels=np.asarray(labels),
        counters=counters.as_dict(),
    )


def _run_one(args: Tuple[OracleSetup, int]) -> RealizationResult:
    return run_realization(*args)


@dataclass(frozen=True)
class OracleRun:
    setup: OracleSetup
    realizations: Tuple[RealizationResult, ...]

    def if_stack(self, *, single_shot: bool = False) -> IfStack:
        return IfStack.from_realizations([r.if_spectra for r in self.realizations], single_shot=single_shot)

    def phase_series(self) -> List[PhaseSeries]:
        series = [r.phase for r in self.realizations if r.phase is not None]
        if not series:
            raise ParameterError("this run has no CW probe phase")
        return series

    def phase_spectrum(self) -> PhaseSpectrum:
        return phase_psd(self.phase_series())

    def measured_variance(self) -> float:
        return phase_variance_measured(self.phase_series())

    def amplitude_statistic(self, span: int = 0) -> float:
        return amplitude_statistics([r.if_spectra[span] for r in self.realizations])

    def snr_estimate(self) -> SnrEstimate:
        rx = [r.rx_symbols for r in self.realizations if r.rx_symbols is not None]
        labels = [r.tx_labels for r in self.realizations if r.tx_labels is not None]
        if not rx:
            raise ParameterError("this run has no QAM probe symbols")
        sc = self.setup.plan.probe.subcarriers[0]
        return estimate_snr(np.concatenate(rx), ConstellationSpec(sc.qam_order), np.concatenate(labels))

    def counters(self) -> Dict[str, float]:
        total: Dict[str, float] = {}
        for r in self.realizations:
            for key, value in r.counters.items():
                total[key] = total.get(key, 0) + value
        return total


def run_oracle(setup: OracleSetup, realizations: int, threads: int = 1) -> OracleRun:
    items = [(setup, i) for i in range(int(realizations))]
    results = run_indexed(_run_one, items, threads)
    run = OracleRun(setup=setup, realizations=tuple(results))
    logger.info(
        "oracle: %d realization(s), %d span(s), counters %s",
        len(results),
        setup.link.num_spans_N,
        run.counters(),
    )
    return run


@dataclass(frozen=True, slots=True)
class ToneCheck:
    beat_ghz: float
    measured_rad: float
    predicted_rad: float

    @property
    def relative_error(self) -> float:
        return abs(self.measured_rad - self.predicted_rad) / self.predicted_rad


def single_tone_oracle(
    fiber: FiberParams,
    beats_ghz: Sequence[float],
    *,
    channel_spacing: float = 50.0,
    pump_power: float = 1e-3,
    probe_power: float = 1e-5,
    sample_rate: float = 256.0,
    n_samples: int = 1 << 14,
    step: StepConfig = StepConfig(),
) -> List[ToneCheck]:
    """Two-tone pump against a CW probe over one span.

    The probe phase tone (per-tone reading at the beat frequency) is compared
    with 2 gamma L_eff sqrt(eta) |P(f)|, |P(f)| taken from the span-input tap.
    """
    link = LinkConfig.transparent(fiber, 1)
    pump_center = 0.5 * channel_spacing
    probe_center = -0.5 * channel_spacing
    delta_lambda = spacing_to_delta_lambda(channel_spacing, fiber.ref_wavelength)
    filter_bw = 0.8 * channel_spacing

    checks = []
    for beat in beats_ghz:
        if beat >= filter_bw:
            raise ParameterError(f"beat {beat} GHz does not fit the {filter_bw} GHz probe filter")
        pump = two_tone_pump(pump_power, beat, pump_center, n_samples, sample_rate)
        probe = cw_probe(probe_power, n_samples, sample_rate, probe_center)
        tx = multiplex([pump, probe])
        out, stack = propagate_link(tx, link, BandTap(pump_center, beat + 2.0), step=step)
        rx = bandpass_filter(compensate_link(out, link), probe_center, filter_bw)
        measured = 0.5 * tone_amplitude(phase_psd([extract_phase(rx)]), beat)
        pump_if = float(stack.per_span[0].at(beat))
        predicted = float(single_tone_phase_amplitude(beat, delta_lambda, pump_if, fiber))
        check = ToneCheck(beat_ghz=float(beat), measured_rad=measured, predicted_rad=predicted)
        logger.info(
            "tone %.2f GHz: measured %.4e rad, model %.4e rad (%.2f%%)",
            beat,
            measured,
            predicted,
            100.0 * check.relative_error,
        )
        checks.append(check)
    return checks
