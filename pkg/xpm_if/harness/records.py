"""Result files: CSV tables, the resolved config and the append-only run log."""

from __future__ import annotations

import json
import logging
import math
import os
import threading
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

from .. import __version__, config
from ..errors import RecordCollisionError
from .schema import ExperimentConfig

__all__ = [
    "RunRecord",
    "format_value",
    "write_csv",
    "write_resolved_config",
    "append_record",
    "read_records",
]

logger = logging.getLogger(__name__)

_LOCK_GUARD = threading.Lock()
_LOCKS: dict[str, threading.RLock] = {}


def _lock_for(path: Path) -> threading.RLock:
    key = str(Path(path).resolve())
    with _LOCK_GUARD:
        lock = _LOCKS.get(key)
        if lock is None:
            lock = threading.RLock()
            _LOCKS[key] = lock
        return lock


@dataclass
class RunRecord:
    recipe: str
    config_hash: str
    seeds: List[int]
    sigma2: Dict[str, float] = field(default_factory=dict)
    spectra_files: List[str] = field(default_factory=list)
    ber: Dict[str, Any] = field(default_factory=dict)
    wall_clock_s: float = 0.0
    tool_version: str = __version__
    created_at: float = field(default_factory=time.time)
    config: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def start(cls, recipe: str, cfg: ExperimentConfig, seeds: Sequence[int]) -> "RunRecord":
        return cls(recipe=recipe, config_hash=cfg.config_hash(), seeds=list(seeds), config=_hashed_view(cfg))

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, allow_nan=True)


def _hashed_view(cfg: ExperimentConfig) -> Dict[str, Any]:
    data = cfg.resolved()
    data["run"] = {k: v for k, v in data["run"].items() if k not in ("out_dir", "threads")}
    return data


def format_value(value: Any, digits: Optional[int] = None) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return format(value, f".{digits or config.FLOAT_DIGITS}g")
    return str(value)


def write_csv(
    path: Path,
    columns: Sequence[str],
    rows: Iterable[Sequence[Any]],
    *,
    header: Optional[Dict[str, Any]] = None,
) -> Path:
    """CSV with a `# key: value` comment block; floats use FLOAT_DIGITS significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# {k}: {v}" for k, v in (header or {}).items()]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    tmp = path.with_name(f".{path.name}.tmp.{os.getpid()}")
    with open(tmp, "w", encoding="utf-8", newline="") as handle:
        handle.write("\n".join(lines) + "\n")
    os.replace(tmp, path)
    logger.info("wrote %s", path)
    return path


def write_resolved_config(out_dir: Path, cfg: ExperimentConfig) -> Path:
    path = Path(out_dir) / "resolved_config.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(cfg.resolved(), handle, indent=2, sort_keys=True)
        handle.write("\n")
    return path


def read_records(path: Path) -> List[Dict[str, Any]]:
    path = Path(path)
    if not path.exists():
        return []
    out = []
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(json.loads(line))
            except json.JSONDecodeError:
                logger.warning("%s:%d: skipping unreadable record", path, lineno)
    return out


def append_record(path: Path, record: RunRecord) -> Path:
    """Append one JSON line; a known hash must map to the same config."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with _lock_for(path):
        for existing in read_records(path):
            if existing.get("config_hash") == record.config_hash and existing.get("config") != record.config:
                raise RecordCollisionError(
                    f"config hash {record.config_hash[:12]} already recorded for a different config in {path}"
                )
        with open(path, "a", encoding="utf-8") as handle:
            handle.write(record.to_json() + "\n")
    return path
