"""Counter-based randomness for replayable protocol runs and trials.

Every random decision in a protocol run is drawn from a Philox stream keyed
by (seed, player, round), so runs are replayable per player and independent
trials can execute in parallel from distinct seeds without shared state.
"""

from __future__ import annotations

import numpy as np

_U64 = np.uint64


def _mix(*parts: int) -> int:
    """Collapse integer key parts into one 64-bit value (splitmix-style)."""
    h = 0x9E3779B97F4A7C15
    for p in parts:
        h ^= (p & 0xFFFFFFFFFFFFFFFF) + 0x9E3779B97F4A7C15 + ((h << 6) & 0xFFFFFFFFFFFFFFFF) + (h >> 2)
        h &= 0xFFFFFFFFFFFFFFFF
        h ^= h >> 30
        h = (h * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
        h ^= h >> 27
    return h


def stream(seed: int, player: int = 0, round_index: int = 0) -> np.random.Generator:
    """Return the Philox generator keyed by (seed, player, round)."""
    key = _mix(seed, player, round_index)
    return np.random.Generator(np.random.Philox(key=key))


def trial_seed(seed: int, trial: int) -> int:
    """Derive a per-trial seed so trials are independent and replayable."""
    return _mix(seed, trial, 0x7261)
