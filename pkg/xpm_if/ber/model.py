"""Average BER of Gray-mapped square M-QAM under AWGN and Gaussian phase noise.

SNR is Es/N0 with unit symbol energy, so the noise variance per quadrature is
1 / (2 SNR).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import special

from ..errors import ConvergenceError, ParameterError, PhaseLimitedError
from ..metrics.evm import radial_snr
from ..signal.qam import ConstellationSpec, labels_to_bits

__all__ = [
    "BerQuery",
    "BerMonteCarlo",
    "BerCurvePoint",
    "BerCurveRow",
    "ber_conditional",
    "ber_phase_noise",
    "simulate_ber_monte_carlo",
    "predict_ber_curve",
]

logger = logging.getLogger(__name__)

MIN_QUADRATURE_NODES = 16
MAX_QUADRATURE_NODES = 4096
CONVERGENCE_RTOL = 1e-4
_MC_CHUNK = 1_000_000


@dataclass(frozen=True, slots=True)
class BerQuery:
    qam_order: int
    snr_rad_linear: float
    sigma2_phase: float
    quadrature_nodes: int = 64

    def __post_init__(self) -> None:
        ConstellationSpec(self.qam_order)
        if self.snr_rad_linear <= 0:
            raise ParameterError(f"snr_rad_linear must be > 0, got {self.snr_rad_linear}")
        if self.sigma2_phase < 0:
            raise ParameterError(f"sigma2_phase must be >= 0, got {self.sigma2_phase}")
        if self.quadrature_nodes < MIN_QUADRATURE_NODES:
            raise ParameterError(f"quadrature_nodes must be >= {MIN_QUADRATURE_NODES}")


@lru_cache(maxsize=16)
def _axis_tables(qam_order: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Decision boundaries, per-point level indices and the Gray Hamming matrix."""
    spec = ConstellationSpec(qam_order)
    n = spec.levels_per_axis
    d = spec.half_distance
    inner = (2.0 * np.arange(1, n) - n) * d
    bounds = np.concatenate(([-np.inf], inner, [np.inf]))
    pts = spec.points
    level_i = spec.axis_decide(pts.real)
    level_q = spec.axis_decide(pts.imag)
    gray = spec.axis_gray()
    xor = gray[:, None] ^ gray[None, :]
    hamming = np.array([[bin(int(v)).count("1") for v in row] for row in xor], dtype=np.float64)
    return bounds, level_i, level_q, hamming


def _axis_bit_errors(coord: np.ndarray, level: np.ndarray, bounds: np.ndarray, hamming: np.ndarray, sigma: float) -> np.ndarray:
    """Expected bit errors on one axis for every (theta, point) pair."""
    cdf = special.ndtr((bounds[None, None, :] - coord[..., None]) / sigma)
    p_decide = np.diff(cdf, axis=-1)
    return np.sum(p_decide * hamming[level][None, :, :], axis=-1)


def _conditional_many(qam_order: int, snr: float, thetas: np.ndarray) -> np.ndarray:
    bounds, level_i, level_q, hamming = _axis_tables(qam_order)
    spec = ConstellationSpec(qam_order)
    rotated = spec.points[None, :] * np.exp(1j * np.asarray(thetas, dtype=np.float64))[:, None]
    sigma = math.sqrt(1.0 / (2.0 * snr))
    errs = _axis_bit_errors(rotated.real, level_i, bounds, hamming, sigma)
    errs = errs + _axis_bit_errors(rotated.imag, level_q, bounds, hamming, sigma)
    return errs.mean(axis=1) / spec.bits_per_symbol


def ber_conditional(qam_order: int, snr: float, theta: float) -> float:
    """Exact BER with every point rotated by `theta`, axis-aligned decisions."""
    if snr <= 0:
        raise ParameterError(f"snr must be > 0, got {snr}")
    return float(_conditional_many(qam_order, snr, np.array([theta]))[0])


def _hermite_average(query: BerQuery, nodes: int) -> float:
    x, w = np.polynomial.hermite.hermgauss(nodes)
    thetas = math.sqrt(2.0 * query.sigma2_phase) * x
    values = _conditional_many(query.qam_order, query.snr_rad_linear, thetas)
    return float(np.dot(w, values) / math.sqrt(math.pi))


def ber_phase_noise(query: BerQuery) -> float:
    """E_theta[BER(theta)] for theta ~ N(0, sigma^2) by Gauss-Hermite quadrature.

    Nodes are doubled until the result moves by less than 1e-4 relative.
    """
    if query.sigma2_phase == 0:
        return ber_conditional(query.qam_order, query.snr_rad_linear, 0.0)
    nodes = query.quadrature_nodes
    previous = _hermite_average(query, nodes)
    while nodes < MAX_QUADRATURE_NODES:
        nodes *= 2
        current = _hermite_average(query, nodes)
        if current == previous or abs(current - previous) <= CONVERGENCE_RTOL * abs(current):
            return current
        previous = current
    raise ConvergenceError(
        f"Gauss-Hermite BER did not converge by {MAX_QUADRATURE_NODES} nodes "
        f"(M={query.qam_order}, snr={query.snr_rad_linear:.3g}, sigma2={query.sigma2_phase:.3g})"
    )


@dataclass(frozen=True, slots=True)
class BerMonteCarlo:
    ber: float
    bit_errors: int
    bits: int

    @property
    def std_error(self) -> float:
        return math.sqrt(max(self.ber * (1.0 - self.ber), 0.0) / self.bits)


def simulate_ber_monte_carlo(
    qam_order: int,
    snr: float,
    sigma2_phase: float,
    symbols: int,
    seed: int,
    *,
    rotation: float = 0.0,
) -> BerMonteCarlo:
    """Symbol-level oracle: Gaussian phase per symbol, complex AWGN, hard decisions.

    `rotation` adds a static phase offset to every symbol on top of the noise.
    """
    if snr <= 0:
        raise ParameterError(f"snr must be > 0, got {snr}")
    if symbols < 1:
        raise ParameterError("need at least one symbol")
    spec = ConstellationSpec(qam_order)
    rng = np.random.default_rng(int(seed))
    sigma = math.sqrt(1.0 / (2.0 * snr))
    phase_sd = math.sqrt(sigma2_phase)
    bps = spec.bits_per_symbol

    errors = 0
    remaining = int(symbols)
    while remaining:
        count = min(remaining, _MC_CHUNK)
        labels = rng.integers(0, qam_order, size=count)
        tx = spec.modulate(labels) * np.exp(1j * (rotation + phase_sd * rng.standard_normal(count)))
        rx = tx + sigma * (rng.standard_normal(count) + 1j * rng.standard_normal(count))
        errors += int(np.count_nonzero(labels_to_bits(spec.demodulate(rx), bps) != labels_to_bits(labels, bps)))
        remaining -= count
    bits = int(symbols) * bps
    return BerMonteCarlo(ber=errors / bits, bit_errors=errors, bits=bits)


@dataclass(frozen=True, slots=True)
class BerCurvePoint:
    launch_power_dbm: float
    sigma2_evolving: float
    sigma2_constant: float
    snr_total_linear: float
    ber_measured: Optional[float] = None


@dataclass(frozen=True, slots=True)
class BerCurveRow:
    launch_power_dbm: float
    sigma2_evolving: float
    sigma2_constant: float
    snr_rad_db: float
    ber_evolving: float
    ber_constant: float
    ber_measured: Optional[float] = None
    phase_limited: bool = False
    ber_oracle: Optional[float] = None


def predict_ber_curve(
    qam_order: int, points: Sequence[BerCurvePoint], quadrature_nodes: int = 64
) -> List[BerCurveRow]:
    """BER per launch power for evolving and constant IF phase variances.

    The radial SNR is decoupled once with the evolving-IF variance and shared
    by both predictions.
    """
    rows: List[BerCurveRow] = []
    for p in points:
        try:
            snr_rad = radial_snr(p.snr_total_linear, p.sigma2_evolving)
        except PhaseLimitedError as exc:
            logger.warning("%.2f dBm: %s", p.launch_power_dbm, exc)
            rows.append(
                BerCurveRow(
                    launch_power_dbm=p.launch_power_dbm,
                    sigma2_evolving=p.sigma2_evolving,
                    sigma2_constant=p.sigma2_constant,
                    snr_rad_db=math.inf,
                    ber_evolving=math.nan,
                    ber_constant=math.nan,
                    ber_measured=p.ber_measured,
                    phase_limited=True,
                )
            )
            continue
        ber_evo = ber_phase_noise(BerQuery(qam_order, snr_rad, p.sigma2_evolving, quadrature_nodes))
        ber_const = ber_phase_noise(BerQuery(qam_order, snr_rad, p.sigma2_constant, quadrature_nodes))
        rows.append(
            BerCurveRow(
                launch_power_dbm=p.launch_power_dbm,
                sigma2_evolving=p.sigma2_evolving,
                sigma2_constant=p.sigma2_constant,
                snr_rad_db=10.0 * math.log10(snr_rad),
                ber_evolving=ber_evo,
                ber_constant=ber_const,
                ber_measured=p.ber_measured,
            )
        )
    return rows
