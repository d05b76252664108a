from __future__ import annotations

import contextvars
from contextlib import contextmanager
from dataclasses import asdict, dataclass
from typing import Dict, Iterator, Optional


@dataclass
class PropagationMetrics:
    spans: int = 0
    steps: int = 0
    fft_calls: int = 0
    amplifier_calls: int = 0
    if_taps: int = 0
    distance_km: float = 0.0

    def as_dict(self) -> Dict[str, float]:
        return asdict(self)


_METRICS: contextvars.ContextVar[Optional[PropagationMetrics]] = contextvars.ContextVar(
    "xpm_if_propagation_metrics",
    default=None,
)


@contextmanager
def propagation_metrics_context() -> Iterator[PropagationMetrics]:
    metrics = PropagationMetrics()
    token = _METRICS.set(metrics)
    try:
        yield metrics
    finally:
        _METRICS.reset(token)


def current_metrics() -> Optional[PropagationMetrics]:
    return _METRICS.get()


def record_step(fft_calls: int, distance_km: float) -> None:
    m = _METRICS.get()
    if m is None:
        return
    m.steps += 1
    m.fft_calls += int(fft_calls)
    m.distance_km += float(distance_km)


def record_span() -> None:
    m = _METRICS.get()
    if m is not None:
        m.spans += 1


def record_amplifier() -> None:
    m = _METRICS.get()
    if m is not None:
        m.amplifier_calls += 1


def record_if_tap() -> None:
    m = _METRICS.get()
    if m is not None:
        m.if_taps += 1
