"""Counter-based uniform draws keyed by (seed, trial index).

Each trial owns one Philox4x64 counter block, i.e. four 64-bit words. The
uniforms for trial ``i`` depend only on ``seed`` and ``i``, so any slice of a
run can be regenerated on its own and the result never depends on how the
trials were partitioned.
"""

from __future__ import annotations

import numpy as np
from numpy.random import Philox

WORDS_PER_TRIAL = 4
_SCALE = 2.0**-53


def trial_uniforms(seed: int, start: int, stop: int) -> np.ndarray:
    """Uniforms in [0, 1) of shape ``(stop - start, 4)`` for trials ``start..stop-1``."""
    if seed < 0:
        raise ValueError("seed must be non-negative")
    if not 0 <= start <= stop:
        raise ValueError(f"bad trial range [{start}, {stop})")
    bitgen = Philox(key=seed)
    if start:
        bitgen.advance(start)
    raw = bitgen.random_raw(WORDS_PER_TRIAL * (stop - start)).reshape(-1, WORDS_PER_TRIAL)
    return (raw >> np.uint64(11)).astype(np.float64) * _SCALE
