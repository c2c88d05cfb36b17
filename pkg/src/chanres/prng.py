"""Counter-based pseudorandom primitives.

Every random bit in a schedule is a pure function of (seed, station, round),
so schedules can be evaluated lazily, out of order and from parallel workers
while staying bit-identical. The generator is a splitmix64-style stream: a
per-(seed, station) key is derived once, and draw r of that stream is the
finalizer applied to key + r*GAMMA.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
STATION_SALT = 0xD1B54A32D192ED03

_U64_GAMMA = np.uint64(GAMMA)
_SHIFT30 = np.uint64(30)
_SHIFT27 = np.uint64(27)
_SHIFT31 = np.uint64(31)
_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL2 = np.uint64(0x94D049BB133111EB)


def mix64(x: int) -> int:
    """splitmix64 finalizer on a 64-bit integer (scalar path)."""
    x &= MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def _mix64_np(x: np.ndarray) -> np.ndarray:
    x = (x ^ (x >> _SHIFT30)) * _MUL1
    x = (x ^ (x >> _SHIFT27)) * _MUL2
    return x ^ (x >> _SHIFT31)


def station_key(seed: int, station: int) -> int:
    """Derive the 64-bit stream key for one station of one seeded schedule."""
    h = mix64((seed + GAMMA) & MASK64)
    return mix64(h ^ (((station + 1) * STATION_SALT) & MASK64))


def draw(key: int, counter: int) -> int:
    """Raw 64-bit draw at position `counter` of the keyed stream."""
    return mix64((key + counter * GAMMA) & MASK64)


def uniform01(key: int, counter: int) -> float:
    """Deterministic uniform in [0, 1) at stream position `counter`."""
    return (draw(key, counter) >> 11) * (1.0 / (1 << 53))


def draw_range(key: int, lo: int, hi: int) -> np.ndarray:
    """Vector of raw draws for counters lo..hi inclusive (uint64)."""
    counters = np.arange(lo, hi + 1, dtype=np.uint64)
    return _mix64_np(np.uint64(key) + counters * _U64_GAMMA)


def threshold_for(p: float) -> int:
    """uint64 acceptance threshold so that P(draw < threshold) == p up to 2^-64."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability out of range: {p}")
    if p >= 1.0:
        return MASK64 + 1
    return int(p * 2.0**64)


def derive_seed(*parts: int) -> int:
    """Fold integers into a 64-bit sub-seed (for per-trial / per-task seeding)."""
    h = GAMMA
    for part in parts:
        h = mix64((h ^ (part & MASK64)) + GAMMA)
    return h
