from __future__ import annotations

import math

from scipy import constants as _const

# =============================================================================
# Canonical units: km, W, GHz, nm, ps^2/km, rad. Time on the simulation grid is
# in ns, so a GHz sample rate gives dt = 1 / sample_rate.
# =============================================================================

SPEED_OF_LIGHT_M_S = 299_792_458.0
PLANCK_J_S = _const.h

# Photon energy for ASE is evaluated at the centre of the 1550 nm band.
ASE_REFERENCE_FREQUENCY_HZ = 193.4e12

REFERENCE_WAVELENGTH_NM = 1550.0

DB_PER_NEPER = 10.0 / math.log(10.0)

PS2_TO_NS2 = 1e-6
GHZ_TO_RAD_PER_PS = 2.0 * math.pi * 1e-3

# Rayleigh statistics used by the K / Q factors.
K_INCOHERENT = 4.0 / math.pi
K_COHERENT = 1.0
RAYLEIGH_VAR_TO_MEAN2 = (4.0 - math.pi) / math.pi
RAYLEIGH_MEAN_TO_RMS = math.sqrt(math.pi / 4.0)
