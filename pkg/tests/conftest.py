from __future__ import annotations

import logging
import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from xpm_if import config  # noqa: E402
from xpm_if.units.params import ChannelPlan, FiberParams, ProbeSpec, SubcarrierSpec  # noqa: E402


@pytest.fixture
def ssmf() -> FiberParams:
    return FiberParams()


@pytest.fixture
def linear_fiber() -> FiberParams:
    return FiberParams(n2=0.0)


@pytest.fixture
def lossless_fiber() -> FiberParams:
    return FiberParams(alpha_db_per_km=0.0)


@pytest.fixture
def desk_plan() -> ChannelPlan:
    return ChannelPlan.symmetric(
        50.0,
        (SubcarrierSpec(symbol_rate=32.0, rolloff=0.05, center_offset=0.0, qam_order=16),),
        pump_power=1e-3,
        probe=ProbeSpec(kind="cw", power=1e-5),
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def out_dir(tmp_path, monkeypatch) -> Path:
    target = tmp_path / "out"
    target.mkdir()
    monkeypatch.setattr(config, "OUT_DIR", target)
    return target


@pytest.fixture(autouse=True)
def _restore_package_logger():
    """The CLI attaches a handler and stops propagation; undo that per test."""
    pkg_logger = logging.getLogger("xpm_if")
    handlers = list(pkg_logger.handlers)
    level = pkg_logger.level
    propagate = pkg_logger.propagate
    yield
    pkg_logger.handlers[:] = handlers
    pkg_logger.setLevel(level)
    pkg_logger.propagate = propagate
