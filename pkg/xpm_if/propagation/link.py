from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

from ..errors import ParameterError
from ..signal.field import SampledField
from ..units.params import ChannelPlan, LinkConfig
from ..util.seeds import derive_seed
from .amplifier import amplify
from .metrics import record_if_tap
from .receiver import bandpass_filter, chromatic_dispersion_compensate
from .spectra import IfStack, Spectrum, intensity_fluctuation_spectrum
from .ssfm import StepConfig, ssfm_span

__all__ = ["BandTap", "pump_tap_for", "propagate_link", "compensate_link"]

logger = logging.getLogger(__name__)

# Extra width around the pump's occupied band for the IF tap, GHz.
TAP_GUARD_GHZ = 2.0

_ASE_STREAM = 7


@dataclass(frozen=True, slots=True)
class BandTap:
    """Brick-wall channel selector feeding the IF spectrum taps."""

    center_offset: float
    bandwidth: float

    def intensity_spectrum(self, f: SampledField) -> Spectrum:
        return intensity_fluctuation_spectrum(bandpass_filter(f, self.center_offset, self.bandwidth))


def pump_tap_for(plan: ChannelPlan, guard_ghz: float = TAP_GUARD_GHZ) -> BandTap:
    lo, hi = plan.pump_band
    return BandTap(center_offset=0.5 * (lo + hi), bandwidth=(hi - lo) + guard_ghz)


def propagate_link(
    f: SampledField,
    link: LinkConfig,
    tap: Optional[BandTap],
    *,
    step: StepConfig = StepConfig(),
    seed: int = 0,
) -> Tuple[SampledField, Optional[IfStack]]:
    """Run all spans; tap the pump IF spectrum at the input of every span.

    Entry k = 1 of the returned stack is the transmitter IF spectrum.
    """
    if not link.is_transparent:
        raise ParameterError(
            f"link gain {link.gain_db} dB does not cancel the {link.fiber.span_loss_db} dB span loss"
        )
    taps: List[Spectrum] = []
    current = f
    for k in range(link.num_spans_N):
        if tap is not None:
            taps.append(tap.intensity_spectrum(current))
            record_if_tap()
        current = ssfm_span(current, link.fiber, step)
        current = amplify(current, link.gain_db, link.amp_noise_figure_db, derive_seed(seed, _ASE_STREAM, k))
        logger.debug("span %d/%d propagated", k + 1, link.num_spans_N)

    stack = IfStack(per_span=tuple(taps)) if taps else None
    return current, stack


def compensate_link(f: SampledField, link: LinkConfig) -> SampledField:
    if link.dispersion_compensation == "none":
        return f
    return chromatic_dispersion_compensate(f, link.accumulated_dispersion_ps_nm, link.fiber.ref_wavelength)
