"""Central configuration for the XPM intensity-fluctuation toolkit."""

from __future__ import annotations

import os
from pathlib import Path

_PACKAGE_DIR = Path(__file__).resolve().parent

OUT_DIR = Path(os.environ.get("XPM_IF_OUT_DIR", "runs"))
THREADS = int(os.environ.get("XPM_IF_THREADS", 1))
LOG_LEVEL = os.environ.get("XPM_IF_LOG_LEVEL", "INFO")
PRESETS_DIR = Path(os.environ.get("XPM_IF_PRESETS_DIR", _PACKAGE_DIR / "presets"))
RESULTS_FILE = os.environ.get("XPM_IF_RESULTS_FILE", "results.jsonl")
FLOAT_DIGITS = int(os.environ.get("XPM_IF_FLOAT_DIGITS", 12))
DEFAULT_PRESET = os.environ.get("XPM_IF_PRESET", "desk")
