"""Exception hierarchy shared by every sub-package."""

from __future__ import annotations

from typing import List, Sequence, Tuple


class XpmIfError(RuntimeError):
    pass


class ConfigError(XpmIfError):
    """Configuration could not be loaded or validated.

    `diagnostics` holds `(field_path, message)` pairs so the CLI can point at the
    offending key instead of dumping a traceback.
    """

    def __init__(self, message: str, diagnostics: Sequence[Tuple[str, str]] = ()) -> None:
        self.diagnostics: List[Tuple[str, str]] = list(diagnostics)
        if self.diagnostics:
            detail = "; ".join(f"{path}: {msg}" for path, msg in self.diagnostics)
            message = f"{message} ({detail})"
        super().__init__(message)


class PresetError(ConfigError):
    pass


class ParameterError(XpmIfError, ValueError):
    pass


class SpectralOverlapError(ParameterError):
    pass


class UnsupportedConstellationError(ParameterError):
    pass


class NumericalError(XpmIfError):
    pass


class NonFiniteFieldError(NumericalError):
    pass


class ConvergenceError(NumericalError):
    pass


class PhaseLimitedError(NumericalError):
    """No radial SNR budget is left once the phase-noise share is removed."""


class RecordCollisionError(XpmIfError):
    pass


class CacheFormatError(XpmIfError):
    pass
