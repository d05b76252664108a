"""Square M-QAM constellations with per-axis Gray labelling."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..errors import ParameterError, UnsupportedConstellationError

__all__ = ["ConstellationSpec", "draw_qam_labels", "generate_qam_symbols", "labels_to_bits"]


def _gray(i: np.ndarray) -> np.ndarray:
    return i ^ (i >> 1)


@dataclass(frozen=True)
class ConstellationSpec:
    """Square QAM with unit average symbol energy.

    Label layout: the high half of the bits is the Gray code of the in-phase
    level index, the low half the Gray code of the quadrature level index.
    Level indices count upwards from the most negative amplitude.
    """

    qam_order: int = 16

    def __post_init__(self) -> None:
        m = int(self.qam_order)
        if m < 4 or (m & (m - 1)) != 0 or int(math.log2(m)) % 2 != 0:
            raise UnsupportedConstellationError(f"only square QAM (4, 16, 64, 256, ...) is supported, got M={m}")

    @property
    def levels_per_axis(self) -> int:
        return math.isqrt(self.qam_order)

    @property
    def bits_per_symbol(self) -> int:
        return int(math.log2(self.qam_order))

    @property
    def bits_per_axis(self) -> int:
        return self.bits_per_symbol // 2

    @property
    def half_distance(self) -> float:
        """Half the spacing between adjacent amplitude levels (16-QAM: 1/sqrt(10))."""
        return math.sqrt(3.0 / (2.0 * (self.qam_order - 1)))

    def axis_levels(self) -> np.ndarray:
        n = self.levels_per_axis
        return (2.0 * np.arange(n) - (n - 1)) * self.half_distance

    def axis_gray(self) -> np.ndarray:
        return _gray(np.arange(self.levels_per_axis))

    @cached_property
    def points(self) -> np.ndarray:
        """Constellation point for every label 0..M-1."""
        n = self.levels_per_axis
        levels = self.axis_levels()
        gray = self.axis_gray()
        pts = np.empty(self.qam_order, dtype=np.complex128)
        for i in range(n):
            for q in range(n):
                label = (int(gray[i]) << self.bits_per_axis) | int(gray[q])
                pts[label] = levels[i] + 1j * levels[q]
        return pts

    def modulate(self, labels: np.ndarray) -> np.ndarray:
        return self.points[np.asarray(labels, dtype=np.int64)]

    def axis_decide(self, values: np.ndarray) -> np.ndarray:
        """Nearest level index on one axis."""
        n = self.levels_per_axis
        idx = np.rint((np.asarray(values) / self.half_distance + (n - 1)) / 2.0)
        return np.clip(idx, 0, n - 1).astype(np.int64)

    def demodulate(self, received: np.ndarray) -> np.ndarray:
        """Minimum-distance decision (per axis) back to labels."""
        rx = np.asarray(received)
        gray = self.axis_gray()
        gi = gray[self.axis_decide(rx.real)]
        gq = gray[self.axis_decide(rx.imag)]
        return (gi << self.bits_per_axis) | gq

    def decide(self, received: np.ndarray) -> np.ndarray:
        return self.modulate(self.demodulate(received))


def labels_to_bits(labels: np.ndarray, bits_per_symbol: int) -> np.ndarray:
    shifts = np.arange(bits_per_symbol - 1, -1, -1)
    return ((np.asarray(labels, dtype=np.int64)[:, None] >> shifts) & 1).astype(np.uint8)


def draw_qam_labels(spec: ConstellationSpec, count: int, seed: int) -> np.ndarray:
    if count < 1:
        raise ParameterError(f"symbol count must be >= 1, got {count}")
    rng = np.random.default_rng(int(seed))
    return rng.integers(0, spec.qam_order, size=int(count), dtype=np.int64)


def generate_qam_symbols(spec: ConstellationSpec, count: int, seed: int) -> np.ndarray:
    """i.i.d. uniform symbols; a pure function of (spec, count, seed)."""
    return spec.modulate(draw_qam_labels(spec, count, seed))
