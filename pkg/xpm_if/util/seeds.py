from __future__ import annotations

import numpy as np


def realization_seed(master_seed: int, realization_index: int) -> int:
    return int(master_seed) + int(realization_index)


def derive_seed(seed: int, *stream: int) -> int:
    """Independent 63-bit seed for a named sub-stream of `seed`."""
    state = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *[int(s) for s in stream]])
    return int(state.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
