from __future__ import annotations

from typing import Optional

import numpy as np

from ..constants.physics import ASE_REFERENCE_FREQUENCY_HZ, PLANCK_J_S
from ..errors import ParameterError
from ..signal.field import SampledField
from .metrics import record_amplifier

__all__ = ["ase_psd", "ase_power", "amplify"]


def ase_psd(gain_db: float, noise_figure_db: float) -> float:
    """ASE PSD per polarization, W/Hz: (NF G - 1) h nu / 2."""
    g = 10.0 ** (gain_db / 10.0)
    nf = 10.0 ** (noise_figure_db / 10.0)
    excess = nf * g - 1.0
    if excess < 0:
        raise ParameterError(f"NF={noise_figure_db} dB is unphysical at G={gain_db} dB")
    return excess * PLANCK_J_S * ASE_REFERENCE_FREQUENCY_HZ / 2.0


def ase_power(gain_db: float, noise_figure_db: float, sample_rate_ghz: float) -> float:
    return ase_psd(gain_db, noise_figure_db) * sample_rate_ghz * 1e9


def amplify(
    f: SampledField,
    gain_db: float,
    noise_figure_db: Optional[float],
    seed: int,
) -> SampledField:
    """Flat gain plus white circular Gaussian ASE over the simulation band.

    `noise_figure_db=None` gives a noiseless amplifier.
    """
    if gain_db < 0:
        raise ParameterError(f"gain_db must be >= 0, got {gain_db}")
    out = f.samples * 10.0 ** (gain_db / 20.0)
    if noise_figure_db is not None:
        p_ase = ase_power(gain_db, noise_figure_db, f.sample_rate)
        rng = np.random.default_rng(int(seed))
        sigma = np.sqrt(p_ase / 2.0)
        out = out + sigma * (rng.standard_normal(f.n_samples) + 1j * rng.standard_normal(f.n_samples))
    record_amplifier()
    return f.with_samples(out)
