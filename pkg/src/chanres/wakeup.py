"""Wake-up pattern generators: benign distributions and adversarial constructions.

A wake-up pattern assigns each active station the global slot at which it
starts its schedule. There is no global clock, so only relative offsets
matter; patterns are normalized so the earliest wake is slot 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .prng import derive_seed


class InfeasiblePatternError(ValueError):
    """Raised when an adversarial construction cannot place its stations."""


@dataclass(frozen=True)
class WakeUpPattern:
    """Map station -> wake slot (>= 1). The adversary's input instance."""

    wakes: dict[int, int]

    def __post_init__(self) -> None:
        if any(w < 1 for w in self.wakes.values()):
            raise ValueError("wake slots must be >= 1")
        object.__setattr__(self, "wakes", dict(self.wakes))

    def __len__(self) -> int:
        return len(self.wakes)

    def __eq__(self, other) -> bool:
        return isinstance(other, WakeUpPattern) and self.wakes == other.wakes

    def stations(self) -> list[int]:
        return sorted(self.wakes)

    def wake(self, station: int) -> int:
        return self.wakes[station]

    def min_wake(self) -> int:
        if not self.wakes:
            raise ValueError("empty pattern")
        return min(self.wakes.values())

    def max_wake(self) -> int:
        if not self.wakes:
            raise ValueError("empty pattern")
        return max(self.wakes.values())

    def shifted(self, delta: int) -> "WakeUpPattern":
        return WakeUpPattern({v: w + delta for v, w in self.wakes.items()})

    def is_normalized(self) -> bool:
        return bool(self.wakes) and self.min_wake() == 1


def normalize(pattern: WakeUpPattern) -> WakeUpPattern:
    """Shift all wakes by a common constant so the earliest is slot 1."""
    if len(pattern) == 0:
        raise ValueError("cannot normalize an empty pattern")
    shift = 1 - pattern.min_wake()
    if shift == 0:
        return pattern
    return pattern.shifted(shift)


def synchronous(stations: Iterable[int]) -> WakeUpPattern:
    """All stations wake together at slot 1."""
    ids = sorted(set(stations))
    if not ids:
        raise ValueError("synchronous pattern needs at least one station")
    return WakeUpPattern({v: 1 for v in ids})


def uniform_random(stations: Iterable[int], window: int, seed: int) -> WakeUpPattern:
    """Each station wakes i.i.d. uniform on [1, window]; result is normalized."""
    ids = sorted(set(stations))
    if not ids:
        raise ValueError("uniform pattern needs at least one station")
    if window < 1:
        raise ValueError("window must be >= 1")
    rng = np.random.Generator(np.random.PCG64(derive_seed(seed, 0x77616B65)))
    wakes = rng.integers(1, window + 1, size=len(ids))
    return normalize(WakeUpPattern({v: int(w) for v, w in zip(ids, wakes)}))


def blocker_pattern(
    target: int,
    target_first_txs: Sequence[int],
    blockers: Sequence[tuple[int, int]],
) -> WakeUpPattern:
    """Align each blocker's first transmission onto one of the target's transmissions.

    `target_first_txs` are the target's transmission rounds r_1 < r_2 < ... on its
    local clock; blocker i = (station, f) has its first transmission at local
    round f and is woken so that it lands exactly on the target's i-th
    transmission. Blockers may wake before the target; the pattern is
    re-anchored so the earliest wake is slot 1.
    """
    rs = list(target_first_txs)
    if any(r < 1 for r in rs) or any(b <= a for a, b in zip(rs, rs[1:])):
        raise ValueError("target transmission rounds must be strictly increasing and >= 1")
    wakes: dict[int, int] = {target: 0}  # raw offsets; normalized below
    paired = min(len(rs), len(blockers))
    for (station, f), r in zip(blockers[:paired], rs[:paired]):
        if f < 1:
            raise ValueError(f"blocker {station} first-transmission round must be >= 1")
        wake = r - f  # target-relative: first tx lands on target's round r
        if station in wakes and wakes[station] != wake:
            raise InfeasiblePatternError(
                f"station {station} would need wake offsets {wakes[station]} and {wake}"
            )
        wakes[station] = wake
    return normalize(WakeUpPattern({v: w - min(wakes.values()) + 1 for v, w in wakes.items()}))


@dataclass(frozen=True)
class AdversaryParams:
    """Parameters of the jamming construction for unknown contention size."""

    epsilon: float
    k: int
    seed: int = 0
    c: float | None = None  # defaults to (1-2e)/(4+2e)

    def __post_init__(self) -> None:
        if not 0.0 < self.epsilon < 0.5:
            raise ValueError("epsilon must lie in (0, 1/2)")
        if self.k < 2:
            raise ValueError("adversary needs k >= 2")
        if self.c is not None and self.c <= 0:
            raise ValueError("c must be positive")

    @property
    def constant(self) -> float:
        if self.c is not None:
            return self.c
        return (1.0 - 2.0 * self.epsilon) / (4.0 + 2.0 * self.epsilon)


def lowerbound_sets(params: AdversaryParams) -> tuple[int, list[int], list[int]]:
    """Set sizes of the jamming construction: (pair station count, |S_j| list, windows).

    Returns (2*floor(k*eps), sizes [|S_0|, |S_1|, ...], wake windows per set).
    """
    k, eps, c = params.k, params.epsilon, params.constant
    n_pairs = 2 * math.floor(k * eps)
    k_prime = k * (1.0 - 2.0 * eps)
    if k_prime < 2 or n_pairs < 2:
        raise InfeasiblePatternError(
            f"k={k}, epsilon={eps} leaves too few stations for the construction"
        )
    sizes = [math.floor(k_prime / 2.0)]
    windows = [max(1, math.ceil(c * k * k / math.log2(k)))]
    j = 1
    while True:
        shrink = (1.0 - eps) ** j
        denom = math.log2(k * shrink)
        if denom <= 0 or c * k * k * shrink * shrink / denom < k * eps:
            break
        size = k_prime * eps * shrink * math.log2(k) / (2.0 * denom)
        if size < 0:
            raise InfeasiblePatternError(f"set size for j={j} is negative")
        sizes.append(math.floor(size))
        windows.append(max(1, math.ceil(c * k * k * shrink * shrink / denom)))
        j += 1
    return n_pairs, sizes, windows


def lowerbound_adversary(params: AdversaryParams, delays: Mapping[int, int]) -> WakeUpPattern:
    """Candidate worst-case wake-up pattern against known first-transmission delays.

    `delays` maps each of k stations to delta_x, the rounds between its wake-up
    and its first transmission. The construction: the max-delay station v wakes
    first; 2*floor(k*eps) stations are paired so every round of
    [1+delta_v, delta_v+floor(k*eps)] receives two first transmissions; the
    remaining stations are split into sets S_0, S_1, ... woken uniformly at
    random on geometrically shrinking windows; leftover stations never wake.
    """
    if len(delays) != params.k:
        raise ValueError(f"need delays for exactly k={params.k} stations, got {len(delays)}")
    if any(d < 0 for d in delays.values()):
        raise ValueError("first-transmission delays must be >= 0")
    n_pairs, sizes, windows = lowerbound_sets(params)
    pool = sorted(delays, key=lambda s: (-delays[s], s))
    v = pool.pop(0)
    delta_v = delays[v]
    if len(pool) < n_pairs:
        raise InfeasiblePatternError("not enough stations for the pair-jam prefix")

    wakes: dict[int, int] = {v: 1}
    # v wakes at slot 1, so its first transmission is at slot 1 + delta_v; two
    # blocker first transmissions land on every slot delta_v + m of the window
    for m in range(1, n_pairs // 2 + 1):
        for _ in range(2):
            x = pool.pop(0)
            wakes[x] = delta_v + m - delays[x]
            if wakes[x] < 1:
                raise InfeasiblePatternError(
                    f"station {x} has delay {delays[x]} > delta_v+{m}-1, cannot align"
                )

    rng = np.random.Generator(np.random.PCG64(derive_seed(params.seed, 0x6C6F7765)))
    for size, window in zip(sizes, windows):
        if size > len(pool):
            raise InfeasiblePatternError("construction needs more stations than k provides")
        members, pool = pool[:size], pool[size:]
        for x, w in zip(members, rng.integers(1, window + 1, size=size)):
            wakes[x] = int(w)
    # anything left in the pool is discarded (never woken)
    return normalize(WakeUpPattern(wakes))


def write_pattern_file(path: str | Path, pattern: WakeUpPattern) -> None:
    """Write the pattern file: K=<count> then '<station> <wake>' lines."""
    with open(path, "w", newline="\n") as f:
        f.write(f"K={len(pattern)}\n")
        for v in pattern.stations():
            f.write(f"{v} {pattern.wake(v)}\n")


def read_pattern_file(path: str | Path) -> WakeUpPattern:
    with open(path) as f:
        lines = f.read().splitlines()
    if not lines or not lines[0].startswith("K="):
        raise ValueError(f"malformed pattern file {path}: expected K= header")
    count = int(lines[0][2:])
    wakes: dict[int, int] = {}
    for line in lines[1 : 1 + count]:
        station_text, wake_text = line.split()
        station = int(station_text)
        if station in wakes:
            raise ValueError(f"pattern file {path}: duplicate station {station}")
        wakes[station] = int(wake_text)
    if len(wakes) != count:
        raise ValueError(f"pattern file {path} promises {count} entries, has {len(wakes)}")
    return WakeUpPattern(wakes)
