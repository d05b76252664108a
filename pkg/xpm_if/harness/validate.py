"""Self-test gates run by the `validate` subcommand.

Every gate is small enough to finish in seconds on the configured fiber.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, replace
from typing import Callable, Dict, List, Tuple

import numpy as np

from ..analytic.q_ratio import q_ratio_average, q_ratio_average_bound
from ..analytic.xpm import XpmModelConfig, link_factor, phase_variance, phasor_sum, xpm_efficiency
from ..constants.physics import K_INCOHERENT, RAYLEIGH_MEAN_TO_RMS
from ..errors import XpmIfError
from ..metrics.phase import extract_phase, phase_psd, phase_variance_measured
from ..propagation.receiver import chromatic_dispersion_compensate
from ..propagation.spectra import IfStack, Spectrum, amplitude_statistics, intensity_fluctuation_spectrum
from ..propagation.ssfm import StepConfig, ssfm_span
from ..signal.field import SampledField, cw_probe
from ..signal.qam import ConstellationSpec
from ..signal.shaping import generate_subcarrier
from ..units.params import FiberParams
from ..util.seeds import derive_seed
from .schema import ExperimentConfig

__all__ = ["ValidationCheck", "run_validation"]

logger = logging.getLogger(__name__)

_GRID = 1 << 12
_RATE = 256.0


@dataclass(frozen=True, slots=True)
class ValidationCheck:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""

    def as_dict(self) -> Dict[str, object]:
        return asdict(self)


def _qam_field(seed: int, power: float = 1e-3) -> SampledField:
    return generate_subcarrier(ConstellationSpec(16), 32.0, 0.05, _GRID, _RATE, power, seed)


def _rel_rms(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def _energy_conservation(cfg: ExperimentConfig, fiber: FiberParams) -> Tuple[float, float, str]:
    lossless = replace(fiber, alpha_db_per_km=0.0, span_length_L=10.0)
    f = _qam_field(cfg.run.seed, 10e-3)
    out = ssfm_span(f, lossless, StepConfig(step_km=0.1))
    return abs(out.energy() / f.energy() - 1.0), 1e-9, "lossless 10 km span, 10 mW QAM"


def _spm_phase(cfg: ExperimentConfig, fiber: FiberParams) -> Tuple[float, float, str]:
    flat = replace(fiber, dispersion_D=0.0)
    power = 1e-3
    f = cw_probe(power, _GRID, _RATE)
    out = ssfm_span(f, flat, StepConfig(step_km=min(0.1, flat.span_length_L / 10.0)))
    measured = float(np.angle(out.samples[0] / f.samples[0]))
    expected = flat.gamma * power * flat.effective_length
    return abs(measured / expected - 1.0), 1e-6, f"gamma P L_eff = {expected:.6e} rad"


def _cdc_round_trip(cfg: ExperimentConfig, fiber: FiberParams) -> Tuple[float, float, str]:
    linear = replace(fiber, alpha_db_per_km=0.0, n2=0.0)
    f = _qam_field(cfg.run.seed)
    out = ssfm_span(f, linear, StepConfig(step_km=1.0))
    back = chromatic_dispersion_compensate(out, linear.dispersion_D * linear.span_length_L, linear.ref_wavelength)
    return _rel_rms(back.samples, f.samples), 1e-6, "disperse one span then compensate"


def _step_halving(cfg: ExperimentConfig, fiber: FiberParams) -> Tuple[float, float, str]:
    step = StepConfig(step_km=cfg.step.step_km, mode=cfg.step.mode)
    f = _qam_field(cfg.run.seed, 1e-3)
    a = ssfm_span(f, fiber, step)
    b = ssfm_span(f, fiber, step.halved())
    return _rel_rms(a.samples, b.samples), 1e-3, f"step {step.step_km} km vs {step.step_km / 2} km"


def _synthetic_stack(num_spans: int) -> IfStack:
    freqs = np.fft.fftfreq(_GRID, d=1.0 / _RATE)
    base = np.exp(-np.abs(freqs) / 10.0) * 1e-4
    base[0] = 0.0
    spans = tuple(Spectrum(values=base * (1.0 + 0.2 * k), freqs=freqs) for k in range(num_spans))
    return IfStack(per_span=spans)


def _factorization(cfg: ExperimentConfig, fiber: FiberParams) -> Tuple[float, float, str]:
    n = max(2, cfg.link.num_spans)
    stack = _synthetic_stack(n)
    dl = 0.4
    got = phasor_sum(stack.freqs, dl, stack, "constant", fiber, n)
    want = stack.per_span[0].values * link_factor(stack.freqs, dl, n, fiber.span_length_L, fiber.dispersion_D)
    mask = want > 0
    err = float(np.max(np.abs(got[mask] / want[mask] - 1.0))) if np.any(mask) else 0.0
    return err, 1e-12, f"N={n}, constant IF"


def _limits(cfg: ExperimentConfig, fiber: FiberParams) -> Tuple[float, float, str]:
    n = max(2, cfg.link.num_spans)
    eta0 = float(xpm_efficiency(0.0, 0.4, fiber))
    lf0 = float(link_factor(0.0, 0.4, n, fiber.span_length_L, fiber.dispersion_D))
    err = max(abs(eta0 - 1.0), abs(lf0 / n - 1.0))
    return err, 1e-12, "eta_XPM(0) = 1, link_factor(0) = N"


def _k_ratio(cfg: ExperimentConfig, fiber: FiberParams) -> Tuple[float, float, str]:
    n = max(2, cfg.link.num_spans)
    stack = _synthetic_stack(n)
    inc = XpmModelConfig(fiber=fiber, num_spans_N=n, k_mode="incoherent")
    coh = XpmModelConfig(fiber=fiber, num_spans_N=n, k_mode="coherent")
    ratio = phase_variance(inc, stack) / phase_variance(coh, stack)
    return abs(ratio / K_INCOHERENT - 1.0), 1e-12, "incoherent / coherent variance"


def _parseval(cfg: ExperimentConfig, fiber: FiberParams) -> Tuple[float, float, str]:
    f = _qam_field(cfg.run.seed)
    p = np.abs(f.samples) ** 2
    intensity_err = abs(intensity_fluctuation_spectrum(f).total_power() / float(np.var(p)) - 1.0)
    t = f.time_axis()
    rng = np.random.default_rng(cfg.run.seed)
    phased = f.with_samples(np.sqrt(1e-3) * np.exp(1j * (0.01 * np.cos(2 * np.pi * 5.0 * t) + 0.003 * rng.standard_normal(t.size))))
    series = [extract_phase(phased)]
    phase_err = abs(phase_psd(series).variance() / phase_variance_measured(series) - 1.0)
    return max(intensity_err, phase_err), 1e-6, "intensity and phase spectra"


def _amplitude_statistics(cfg: ExperimentConfig, fiber: FiberParams) -> Tuple[float, float, str]:
    spectra = [intensity_fluctuation_spectrum(_qam_field(derive_seed(cfg.run.seed, 9, r))) for r in range(32)]
    k_a = amplitude_statistics(spectra)
    return abs(k_a - RAYLEIGH_MEAN_TO_RMS), 0.03, f"K_a = {k_a:.4f}"


def _q_bounds(cfg: ExperimentConfig, fiber: FiberParams) -> Tuple[float, float, str]:
    upper = q_ratio_average_bound()
    worst = 0.0
    parts = []
    for n in cfg.q_ratio.spans:
        avg = q_ratio_average(n, max(cfg.q_ratio.c_points, n), cfg.q_ratio.trials, derive_seed(cfg.run.seed, 11, n))
        ci = 0.0 if math.isnan(avg.ci_half_width) else avg.ci_half_width
        excess = max(1.0 - avg.q, avg.q - (upper + 3.0 * ci), 0.0)
        worst = max(worst, excess)
        parts.append(f"N={n}: {avg.q:.4f}")
    return worst, 0.0, ", ".join(parts)


_GATES: List[Tuple[str, Callable[[ExperimentConfig, FiberParams], Tuple[float, float, str]]]] = [
    ("energy_conservation", _energy_conservation),
    ("spm_phase", _spm_phase),
    ("cdc_round_trip", _cdc_round_trip),
    ("step_halving", _step_halving),
    ("link_factor_factorization", _factorization),
    ("efficiency_limits", _limits),
    ("k_ratio", _k_ratio),
    ("parseval", _parseval),
    ("amplitude_statistics", _amplitude_statistics),
    ("q_bounds", _q_bounds),
]


def run_validation(cfg: ExperimentConfig) -> List[ValidationCheck]:
    fiber = cfg.fiber.to_fiber()
    checks = []
    for name, gate in _GATES:
        try:
            value, threshold, detail = gate(cfg, fiber)
            passed = value <= threshold
        except XpmIfError as exc:
            value, threshold, detail, passed = math.nan, math.nan, str(exc), False
        level = logging.INFO if passed else logging.ERROR
        logger.log(level, "%-28s %s  value=%.3e threshold=%.1e  %s", name, "ok" if passed else "FAIL", value, threshold, detail)
        checks.append(ValidationCheck(name=name, passed=passed, value=value, threshold=threshold, detail=detail))
    return checks
