"""Preset and config-file loaders."""

from __future__ import annotations

import copy
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

from .. import config
from ..errors import ConfigError, PresetError
from .schema import ExperimentConfig, validate_config

__all__ = ["available_presets", "load_preset", "load_config", "deep_merge"]

logger = logging.getLogger(__name__)

_presets: Dict[str, Dict[str, Any]] = {}


def _preset_path(name: str) -> Path:
    path = config.PRESETS_DIR / f"{name}.json"
    if not path.exists():
        raise PresetError(f"Missing preset file {path}", [("extends", f"unknown preset {name!r}")])
    return path


def _read_json(path: Path) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: malformed JSON", [(f"line {exc.lineno}, column {exc.colno}", exc.msg)]) from exc
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return data


def available_presets() -> list[str]:
    return sorted(p.stem for p in config.PRESETS_DIR.glob("*.json"))


def load_preset(name: str, force: bool = False) -> Dict[str, Any]:
    """Raw preset document; callers get a deep copy."""
    if name in _presets and not force:
        return copy.deepcopy(_presets[name])
    raw = _read_json(_preset_path(name))
    if "extends" in raw:
        raise PresetError(f"preset {name!r} may not extend another preset")
    _presets[name] = raw
    return copy.deepcopy(raw)


def deep_merge(base: Dict[str, Any], over: Dict[str, Any]) -> Dict[str, Any]:
    """Recursive dict merge; lists and scalars in `over` replace those in `base`."""
    out = copy.deepcopy(base)
    for key, value in over.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def load_config(path: Optional[Path] = None, *, preset: Optional[str] = None) -> ExperimentConfig:
    """Resolve a config file (optionally extending a preset) or a bare preset.

    With neither argument the `XPM_IF_PRESET` default is used.
    """
    if path is None:
        name = preset or config.DEFAULT_PRESET
        logger.info("using preset %s", name)
        return validate_config(load_preset(name))

    raw = _read_json(Path(path))
    base_name = raw.pop("extends", None) or preset
    if base_name is not None:
        if not isinstance(base_name, str):
            raise ConfigError("invalid experiment config", [("extends", "must be a preset name")])
        raw = deep_merge(load_preset(base_name), raw)
    return validate_config(raw)
