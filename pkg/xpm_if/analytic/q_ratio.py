"""Expectation ratio Q = E|upsilon| / |E upsilon| of a phasor sum with Rayleigh amplitudes.

upsilon = sum_k a_k exp(-j C (k - 1)), a_k i.i.d. Rayleigh with mean mu.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from scipy import stats

from ..constants.physics import RAYLEIGH_VAR_TO_MEAN2
from ..errors import ParameterError
from ..util.seeds import derive_seed

__all__ = [
    "QRatioEstimate",
    "QRatioAverage",
    "MIN_TRIALS",
    "phasor_resultant",
    "q_ratio_monte_carlo",
    "q_ratio_bound",
    "q_ratio_average_bound",
    "q_ratio_average",
]

logger = logging.getLogger(__name__)

MIN_TRIALS = 10_000
DEFAULT_BATCHES = 20
_CHUNK_ROWS = 100_000
# |sum exp(-j C k)| below this fraction of N counts as a null.
NULL_TOLERANCE = 1e-9


@dataclass(frozen=True, slots=True)
class QRatioEstimate:
    num_spans: int
    c: float
    q: float
    ci_half_width: float
    resultant: float
    trials: int
    defined: bool = True

    @property
    def ci(self) -> Tuple[float, float]:
        return self.q - self.ci_half_width, self.q + self.ci_half_width


@dataclass(frozen=True, slots=True)
class QRatioAverage:
    num_spans: int
    q: float
    ci_half_width: float
    points_used: int
    points_excluded: int
    trials: int


def phasor_resultant(num_spans: int, c: float) -> float:
    """R = |sum_k exp(-j C (k - 1))|."""
    k = np.arange(int(num_spans))
    return float(np.abs(np.sum(np.exp(-1j * c * k))))


def _check(num_spans: int, trials: int, mu: float) -> None:
    if num_spans < 1:
        raise ParameterError(f"num_spans must be >= 1, got {num_spans}")
    if trials < MIN_TRIALS:
        raise ParameterError(f"need at least {MIN_TRIALS} trials, got {trials}")
    if mu <= 0:
        raise ParameterError(f"mu must be > 0, got {mu}")


def _batch_moments(
    num_spans: int, c: float, trials: int, mu: float, seed: int, batches: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Per-batch sample means of |upsilon| and of upsilon."""
    rng = np.random.default_rng(int(seed))
    scale = mu / math.sqrt(math.pi / 2.0)
    phasors = np.exp(-1j * c * np.arange(num_spans))
    per_batch = trials // batches
    mean_abs = np.empty(batches)
    mean_vec = np.empty(batches, dtype=np.complex128)
    for b in range(batches):
        abs_sum = 0.0
        vec_sum = 0.0 + 0.0j
        remaining = per_batch
        while remaining:
            rows = min(remaining, _CHUNK_ROWS)
            a = rng.rayleigh(scale=scale, size=(rows, num_spans))
            upsilon = a @ phasors
            abs_sum += float(np.sum(np.abs(upsilon)))
            vec_sum += complex(np.sum(upsilon))
            remaining -= rows
        mean_abs[b] = abs_sum / per_batch
        mean_vec[b] = vec_sum / per_batch
    return mean_abs, mean_vec


def _ci_half_width(samples: np.ndarray) -> float:
    b = samples.size
    if b < 2:
        return float("nan")
    t = float(stats.t.ppf(0.975, b - 1))
    return t * float(np.std(samples, ddof=1)) / math.sqrt(b)


def q_ratio_monte_carlo(
    num_spans: int,
    c: float,
    trials: int,
    seed: int,
    *,
    mu: float = 1.0,
    batches: int = DEFAULT_BATCHES,
) -> QRatioEstimate:
    """Sample Q at one C with a 95% batch-means confidence interval.

    At a null of R the ratio is reported with `defined=False`.
    """
    _check(num_spans, trials, mu)
    r = phasor_resultant(num_spans, c)
    used = (trials // batches) * batches
    if r < NULL_TOLERANCE * num_spans:
        logger.info("Q undefined at C=%.6f for N=%d (R=%.3e)", c, num_spans, r)
        return QRatioEstimate(num_spans, float(c), float("nan"), float("nan"), r, used, defined=False)

    mean_abs, mean_vec = _batch_moments(num_spans, c, trials, mu, seed, batches)
    q = float(np.mean(mean_abs) / abs(np.mean(mean_vec)))
    per_batch_q = mean_abs / np.abs(mean_vec)
    return QRatioEstimate(num_spans, float(c), q, _ci_half_width(per_batch_q), r, used)


def q_ratio_bound(num_spans: int, c: float, mu: float, sigma: float) -> Tuple[float, float]:
    """(1, sqrt(1 + N sigma^2 / (mu^2 R^2))); the upper bound is inf at a null."""
    if mu <= 0:
        raise ParameterError(f"mu must be > 0, got {mu}")
    if sigma < 0:
        raise ParameterError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return 1.0, 1.0
    r = phasor_resultant(num_spans, c)
    if r < NULL_TOLERANCE * num_spans:
        return 1.0, math.inf
    return 1.0, math.sqrt(1.0 + num_spans * sigma**2 / (mu**2 * r**2))


def q_ratio_average_bound(var_to_mean2: float = RAYLEIGH_VAR_TO_MEAN2) -> float:
    """Upper bound with <R^2> = N; sqrt(4 / pi) for Rayleigh amplitudes."""
    return math.sqrt(1.0 + var_to_mean2)


def q_ratio_average(
    num_spans: int,
    c_points: int,
    trials: int,
    seed: int,
    *,
    mu: float = 1.0,
    batches: int = DEFAULT_BATCHES,
) -> QRatioAverage:
    """Q averaged over C = 2 pi m / c_points, nulls excluded.

    Q_avg = sqrt(sum_C (E|upsilon|)^2 / sum_C |E upsilon|^2) from sample means.
    """
    _check(num_spans, trials, mu)
    if c_points < num_spans:
        raise ParameterError(f"c_points ({c_points}) must be >= num_spans ({num_spans})")

    num_b = np.zeros(batches)
    den_b = np.zeros(batches)
    num_total = 0.0
    den_total = 0.0
    excluded = 0
    for m in range(c_points):
        c = 2.0 * math.pi * m / c_points
        if phasor_resultant(num_spans, c) < NULL_TOLERANCE * num_spans:
            excluded += 1
            continue
        mean_abs, mean_vec = _batch_moments(num_spans, c, trials, mu, derive_seed(seed, m), batches)
        num_b += mean_abs**2
        den_b += np.abs(mean_vec) ** 2
        num_total += float(np.mean(mean_abs)) ** 2
        den_total += float(np.abs(np.mean(mean_vec))) ** 2

    q = math.sqrt(num_total / den_total)
    per_batch_q = np.sqrt(num_b / den_b)
    used = c_points - excluded
    logger.info("Q_avg(N=%d) = %.5f over %d C points (%d nulls)", num_spans, q, used, excluded)
    return QRatioAverage(
        num_spans=num_spans,
        q=q,
        ci_half_width=_ci_half_width(per_batch_q),
        points_used=used,
        points_excluded=excluded,
        trials=(trials // batches) * batches,
    )
