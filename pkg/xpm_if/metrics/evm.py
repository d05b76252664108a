from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import ParameterError, PhaseLimitedError
from ..signal.qam import ConstellationSpec, labels_to_bits

__all__ = [
    "SnrEstimate",
    "evm",
    "snr_from_evm",
    "align_to_reference",
    "count_bit_errors",
    "estimate_snr",
    "radial_snr",
]

logger = logging.getLogger(__name__)

# Decision-directed EVM is trusted below this pre-FEC BER.
DECISION_DIRECTED_MAX_BER = 1e-2


@dataclass(frozen=True, slots=True)
class SnrEstimate:
    evm_rms: float
    snr_linear: float
    ber: float
    bit_errors: int
    bits: int
    decision_directed: bool

    @property
    def snr_db(self) -> float:
        return 10.0 * math.log10(self.snr_linear)


def evm(
    rx_symbols: np.ndarray,
    constellation: ConstellationSpec,
    reference: Optional[np.ndarray] = None,
) -> float:
    """RMS error vector relative to the reference RMS.

    Without `reference` the minimum-distance decisions are the reference.
    """
    rx = np.asarray(rx_symbols, dtype=np.complex128)
    if rx.size == 0:
        raise ParameterError("evm needs at least one symbol")
    ref = constellation.decide(rx) if reference is None else np.asarray(reference, dtype=np.complex128)
    if ref.shape != rx.shape:
        raise ParameterError("reference and received symbols differ in length")
    ref_power = float(np.mean(np.abs(ref) ** 2))
    if ref_power == 0:
        raise ParameterError("reference symbols carry no power")
    return math.sqrt(float(np.mean(np.abs(rx - ref) ** 2)) / ref_power)


def snr_from_evm(evm_rms: float) -> float:
    if evm_rms <= 0:
        return math.inf
    return 1.0 / evm_rms**2


def align_to_reference(rx_symbols: np.ndarray, tx_symbols: np.ndarray) -> np.ndarray:
    """Remove one complex gain (static phase and scale) by least squares."""
    rx = np.asarray(rx_symbols, dtype=np.complex128)
    tx = np.asarray(tx_symbols, dtype=np.complex128)
    h = np.vdot(tx, rx) / np.vdot(tx, tx)
    if h == 0:
        raise ParameterError("received symbols are uncorrelated with the reference")
    return rx / h


def count_bit_errors(constellation: ConstellationSpec, rx_symbols: np.ndarray, tx_labels: np.ndarray) -> int:
    rx_labels = constellation.demodulate(rx_symbols)
    bps = constellation.bits_per_symbol
    return int(np.count_nonzero(labels_to_bits(rx_labels, bps) != labels_to_bits(tx_labels, bps)))


def estimate_snr(rx_symbols: np.ndarray, constellation: ConstellationSpec, tx_labels: np.ndarray) -> SnrEstimate:
    """EVM-based SNR, decision-directed only while the pre-FEC BER stays low."""
    rx = np.asarray(rx_symbols, dtype=np.complex128)
    errors = count_bit_errors(constellation, rx, tx_labels)
    bits = rx.size * constellation.bits_per_symbol
    ber = errors / bits
    directed = ber < DECISION_DIRECTED_MAX_BER
    reference = None if directed else constellation.modulate(tx_labels)
    e = evm(rx, constellation, reference)
    return SnrEstimate(
        evm_rms=e,
        snr_linear=snr_from_evm(e),
        ber=ber,
        bit_errors=errors,
        bits=bits,
        decision_directed=directed,
    )


def radial_snr(snr_total_linear: float, sigma2_phase: float) -> float:
    """1/SNR_rad = 1/SNR_total - sigma^2_phase."""
    if snr_total_linear <= 0:
        raise ParameterError(f"snr must be > 0, got {snr_total_linear}")
    if sigma2_phase < 0:
        raise ParameterError(f"phase variance must be >= 0, got {sigma2_phase}")
    budget = 1.0 / snr_total_linear - sigma2_phase
    if budget <= 0:
        raise PhaseLimitedError(
            f"phase noise {sigma2_phase:.3e} rad^2 uses the whole 1/SNR budget {1.0 / snr_total_linear:.3e}"
        )
    return 1.0 / budget
