"""Probability profiles and bit-schedule generation for the schedule families.

Three analytic families are supported, plus baselines:

* slofi  -- known contention k, probability climbs from 1/(2k) towards 1/2
            over 2*ceil(log2 k)+1 phases of T = ceil(c*k*log2 N) rounds.
* spord  -- unknown k, probability decays as 1/sqrt(i) over 16*N^2 phases
            of T = ceil(b*ln N) rounds.
* spordack -- unknown k with acknowledgments, probability decays as
            min(1/2, sqrt(ln i / i)) over ceil(c*N^2/ln N) phases of
            T = ceil(ln N) rounds.
* tdma / constant-half / explicit -- baselines and file-loaded schedules.

Schedules are non-adaptive: station v's bit at local round r is a pure
function of (seed, v, r), produced by a counter-based generator, so the whole
schedule exists "before" execution and can be queried in any order.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .prng import draw_range, station_key

INT63_MAX = (1 << 63) - 1


class Family(enum.Enum):
    SLOFI = "slofi"
    SPORD = "spord"
    SPORDACK = "spordack"
    TDMA = "tdma"
    CONSTANT_HALF = "constant-half"
    EXPLICIT = "explicit"

    @classmethod
    def parse(cls, text: str) -> "Family":
        try:
            return cls(text.lower())
        except ValueError:
            names = ", ".join(f.value for f in cls)
            raise ValueError(f"unknown family {text!r} (expected one of: {names})")


def slofi_probability(i: int, k: int) -> float:
    """Transmission probability in phase i of the known-k family: min(1/2, 2^(i/2)/(2k))."""
    if k < 2:
        raise ValueError(f"slofi probability requires k >= 2, got {k}")
    if not 0 <= i <= 2 * math.ceil(math.log2(k)):
        raise ValueError(f"phase index {i} outside [0, 2*ceil(log2 k)] for k={k}")
    return min(0.5, 2.0 ** (i / 2.0) / (2.0 * k))


def spord_probability(i: int) -> float:
    """Transmission probability in phase i of the decay family: 1/2 then 1/sqrt(i)."""
    if i < 1:
        raise ValueError(f"phase index must be >= 1, got {i}")
    if i <= 3:
        return 0.5
    return 1.0 / math.sqrt(i)


def spordack_probability(i: int) -> float:
    """Transmission probability in phase i of the ack decay family: min(1/2, sqrt(ln i / i))."""
    if i < 1:
        raise ValueError(f"phase index must be >= 1, got {i}")
    if i <= 3:
        return 0.5
    return min(0.5, math.sqrt(math.log(i) / i))


@dataclass(frozen=True, eq=False)
class SchedulePlan:
    """A schedule family instantiated with its parameters and a seed.

    `horizon_override` supplies the schedule length for tdma/constant-half;
    `explicit_bits` holds the (N, H) bit matrix for family explicit.
    """

    family: Family
    N: int
    seed: int = 0
    k: int | None = None
    c: float | None = None
    b: float | None = None
    horizon_override: int | None = None
    explicit_bits: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.N < 1:
            raise ValueError("N must be >= 1")
        fam = self.family
        if fam is Family.SLOFI:
            if self.k is None or self.k < 1:
                raise ValueError("slofi requires the contention bound k >= 1")
            if self.k > self.N:
                raise ValueError("slofi requires k <= N")
            if self.c is None or self.c <= 0:
                raise ValueError("slofi requires a positive constant c")
            if self.N < 2:
                raise ValueError("slofi requires N >= 2")
        elif fam is Family.SPORD:
            if self.b is None or self.b <= 0:
                raise ValueError("spord requires a positive constant b")
            if self.N < 2:
                raise ValueError("spord requires N >= 2")
        elif fam is Family.SPORDACK:
            if self.c is None or self.c <= 0:
                raise ValueError("spordack requires a positive constant c")
            if self.N < 2:
                raise ValueError("spordack requires N >= 2")
        elif fam in (Family.TDMA, Family.CONSTANT_HALF):
            if self.horizon_override is None or self.horizon_override < 0:
                raise ValueError(f"{fam.value} requires a caller-supplied horizon >= 0")
        elif fam is Family.EXPLICIT:
            bits = self.explicit_bits
            if bits is None or bits.ndim != 2:
                raise ValueError("explicit family requires an (N, H) bit matrix")
            if bits.shape[0] != self.N:
                raise ValueError("explicit bit matrix must have one row per station")

    @property
    def T(self) -> int:
        """Phase length in rounds (1 for the baseline families)."""
        if self.family is Family.SLOFI:
            return math.ceil(self.c * self.k * math.log2(self.N))
        if self.family is Family.SPORD:
            return math.ceil(self.b * math.log(self.N))
        if self.family is Family.SPORDACK:
            return math.ceil(math.log(self.N))
        return 1

    @property
    def phase_count(self) -> int:
        if self.family is Family.SLOFI:
            return 2 * math.ceil(math.log2(self.k)) + 1
        if self.family is Family.SPORD:
            return 16 * self.N * self.N
        if self.family is Family.SPORDACK:
            return math.ceil(self.c * self.N * self.N / math.log(self.N))
        return self.horizon  # one-round phases

    @property
    def horizon(self) -> int:
        """Total schedule length in local rounds."""
        fam = self.family
        if fam is Family.EXPLICIT:
            return int(self.explicit_bits.shape[1])
        if fam in (Family.TDMA, Family.CONSTANT_HALF):
            return int(self.horizon_override)
        total = self.T * self.phase_count
        if total > INT63_MAX:
            raise OverflowError(f"schedule horizon {total} exceeds 2^63-1")
        return total

    def phase_start(self) -> int:
        """First phase index: 0 for slofi, 1 otherwise."""
        return 0 if self.family is Family.SLOFI else 1

    def local_round_to_phase(self, r: int) -> tuple[int, int]:
        """Map local round r (1-based) to (phase index, round-in-phase)."""
        if not 1 <= r <= self.horizon:
            raise ValueError(f"round {r} outside schedule horizon {self.horizon}")
        T = self.T
        i = (r - 1) // T + self.phase_start()
        j = (r - 1) % T + 1
        return i, j

    def phase_probability(self, i: int) -> float:
        """Transmission probability during phase i."""
        fam = self.family
        if fam is Family.SLOFI:
            # same formula as slofi_probability; k = 1 degenerates to the 1/2 clamp
            return min(0.5, 2.0 ** (i / 2.0) / (2.0 * self.k))
        if fam is Family.SPORD:
            return spord_probability(i)
        if fam is Family.SPORDACK:
            return spordack_probability(i)
        if fam is Family.CONSTANT_HALF:
            return 0.5
        raise ValueError(f"family {fam.value} has no id-independent probability profile")

    def probability_at(self, r: int) -> float:
        """Transmission probability at local round r."""
        i, _ = self.local_round_to_phase(r)
        return self.phase_probability(i)

    def _params_key(self) -> tuple:
        return (self.family, self.N, self.k, self.c, self.b)


def local_round_to_phase(plan: SchedulePlan, r: int) -> tuple[int, int]:
    return plan.local_round_to_phase(r)


def horizon(plan: SchedulePlan) -> int:
    return plan.horizon


@lru_cache(maxsize=64)
def _phase_prob_table(params_key: tuple, n_phases: int) -> np.ndarray:
    """Probabilities for the first n_phases phases, as float64 (cached per plan params)."""
    family, N, k, c, b = params_key
    if family is Family.SLOFI:
        i = np.arange(0, n_phases, dtype=np.float64)
        return np.minimum(0.5, np.exp2(i / 2.0) / (2.0 * k))
    if family is Family.SPORD:
        i = np.arange(1, n_phases + 1, dtype=np.float64)
        return np.where(i <= 3, 0.5, 1.0 / np.sqrt(i))
    if family is Family.SPORDACK:
        i = np.arange(1, n_phases + 1, dtype=np.float64)
        with np.errstate(divide="ignore"):
            decayed = np.sqrt(np.log(i) / i)
        return np.where(i <= 3, 0.5, np.minimum(0.5, decayed))
    if family is Family.CONSTANT_HALF:
        return np.full(n_phases, 0.5)
    raise ValueError(f"family {family.value} has no probability table")


def phase_probabilities(plan: SchedulePlan, n_phases: int) -> np.ndarray:
    """Vector of per-phase probabilities for phases start..start+n_phases-1."""
    return _phase_prob_table(plan._params_key(), n_phases)


def probabilities_for_rounds(plan: SchedulePlan, rounds: np.ndarray) -> np.ndarray:
    """p at each local round; rounds outside [1, horizon] contribute 0."""
    rounds = np.asarray(rounds, dtype=np.int64)
    out = np.zeros(rounds.shape, dtype=np.float64)
    valid = (rounds >= 1) & (rounds <= plan.horizon)
    if not valid.any():
        return out
    T = plan.T
    phase_idx = (rounds[valid] - 1) // T  # 0-based offset into the table
    table = phase_probabilities(plan, int(phase_idx.max()) + 1)
    out[valid] = table[phase_idx]
    return out


class ProbabilityProfile:
    """p(r) view of a plan, evaluable per round or vectorized."""

    def __init__(self, plan: SchedulePlan):
        if plan.family in (Family.TDMA, Family.EXPLICIT):
            raise ValueError(f"family {plan.family.value} has no probability profile")
        self.plan = plan

    @property
    def horizon(self) -> int:
        return self.plan.horizon

    def at(self, r: int) -> float:
        return self.plan.probability_at(r)

    def at_rounds(self, rounds: np.ndarray) -> np.ndarray:
        return probabilities_for_rounds(self.plan, rounds)


def bits_range(plan: SchedulePlan, v: int, lo: int, hi: int) -> np.ndarray:
    """Schedule bits of station v for local rounds lo..hi inclusive (bool array).

    Pure function of (plan.seed, v, round): any query order, any process.
    """
    if not 0 <= v < plan.N:
        raise ValueError(f"station {v} outside [0, {plan.N - 1}]")
    if lo < 1 or hi > plan.horizon:
        raise ValueError(f"rounds [{lo}, {hi}] outside schedule horizon {plan.horizon}")
    if hi < lo:
        return np.zeros(0, dtype=bool)
    fam = plan.family
    if fam is Family.TDMA:
        rounds = np.arange(lo, hi + 1, dtype=np.int64)
        return (rounds - 1) % plan.N == v
    if fam is Family.EXPLICIT:
        return plan.explicit_bits[v, lo - 1 : hi].astype(bool)
    T = plan.T
    rounds = np.arange(lo, hi + 1, dtype=np.int64)
    table = phase_probabilities(plan, int((hi - 1) // T) + 1)
    probs = table[(rounds - 1) // T]
    thresholds = (probs * 2.0**64).astype(np.uint64)
    draws = draw_range(station_key(plan.seed, v), lo, hi)
    return draws < thresholds


def bit_at(plan: SchedulePlan, v: int, r: int) -> bool:
    """Schedule bit of station v at local round r (1-based)."""
    return bool(bits_range(plan, v, r, r)[0])


@dataclass(frozen=True)
class DeterministicSchedule:
    """An explicit per-station bit schedule, immutable after construction."""

    station: int
    bits: np.ndarray

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.bits, dtype=bool)
        arr.setflags(write=False)
        object.__setattr__(self, "bits", arr)

    @property
    def horizon(self) -> int:
        return int(self.bits.shape[0])

    def bit(self, r: int) -> bool:
        if not 1 <= r <= self.horizon:
            raise ValueError(f"round {r} outside schedule horizon {self.horizon}")
        return bool(self.bits[r - 1])

    def bits_range(self, lo: int, hi: int) -> np.ndarray:
        if lo < 1 or hi > self.horizon:
            raise ValueError(f"rounds [{lo}, {hi}] outside schedule horizon {self.horizon}")
        return self.bits[lo - 1 : hi]


class PlanSchedule:
    """Lazy view of one station's schedule under a plan (nothing materialized)."""

    def __init__(self, plan: SchedulePlan, station: int):
        if not 0 <= station < plan.N:
            raise ValueError(f"station {station} outside [0, {plan.N - 1}]")
        self.plan = plan
        self.station = station

    @property
    def horizon(self) -> int:
        return self.plan.horizon

    def bit(self, r: int) -> bool:
        return bit_at(self.plan, self.station, r)

    def bits_range(self, lo: int, hi: int) -> np.ndarray:
        return bits_range(self.plan, self.station, lo, hi)


def materialize(plan: SchedulePlan, v: int, up_to: int) -> DeterministicSchedule:
    """Freeze station v's first `up_to` rounds into an explicit schedule."""
    if up_to < 0 or up_to > plan.horizon:
        raise ValueError(f"up_to {up_to} outside [0, {plan.horizon}]")
    if up_to == 0:
        return DeterministicSchedule(v, np.zeros(0, dtype=bool))
    return DeterministicSchedule(v, bits_range(plan, v, 1, up_to))


def transmission_rounds(schedule, limit: int | None = None, up_to: int | None = None) -> list[int]:
    """Local rounds (1-based) at which the schedule transmits, in order.

    Stops after `limit` rounds if given; scans at most `up_to` rounds.
    """
    end = schedule.horizon if up_to is None else min(up_to, schedule.horizon)
    found: list[int] = []
    chunk = 4096
    for lo in range(1, end + 1, chunk):
        hi = min(lo + chunk - 1, end)
        ones = np.flatnonzero(schedule.bits_range(lo, hi))
        for idx in ones:
            found.append(lo + int(idx))
            if limit is not None and len(found) >= limit:
                return found
    return found


def first_transmission_delay(schedule, up_to: int | None = None) -> int | None:
    """Rounds between activation and first transmission (0 = transmits at once)."""
    rounds = transmission_rounds(schedule, limit=1, up_to=up_to)
    return rounds[0] - 1 if rounds else None


def write_schedule_file(path: str | Path, schedules: list[DeterministicSchedule]) -> None:
    """Write the bit-exact schedule file: N=, H=, then one 0/1 line per station."""
    n = len(schedules)
    if n == 0:
        raise ValueError("no schedules to write")
    horizons = {s.horizon for s in schedules}
    if len(horizons) != 1:
        raise ValueError("all schedules must share one horizon")
    h = horizons.pop()
    by_station = {s.station: s for s in schedules}
    if sorted(by_station) != list(range(n)):
        raise ValueError("schedules must cover stations 0..N-1 exactly once")
    with open(path, "w", newline="\n") as f:
        f.write(f"N={n}\n")
        f.write(f"H={h}\n")
        for v in range(n):
            f.write("".join("1" if b else "0" for b in by_station[v].bits) + "\n")


def read_schedule_file(path: str | Path) -> SchedulePlan:
    """Read a schedule file into an explicit-family plan."""
    with open(path) as f:
        lines = f.read().splitlines()
    if len(lines) < 2 or not lines[0].startswith("N=") or not lines[1].startswith("H="):
        raise ValueError(f"malformed schedule file {path}: expected N=/H= header")
    n = int(lines[0][2:])
    h = int(lines[1][2:])
    if len(lines) < 2 + n:
        raise ValueError(f"schedule file {path} has {len(lines) - 2} bit rows, expected {n}")
    bits = np.zeros((n, h), dtype=bool)
    for v in range(n):
        row = lines[2 + v]
        if len(row) != h or set(row) - {"0", "1"}:
            raise ValueError(f"schedule file {path}: row {v} is not {h} chars of 0/1")
        bits[v] = np.frombuffer(row.encode(), dtype=np.uint8) == ord("1")
    return SchedulePlan(family=Family.EXPLICIT, N=n, explicit_bits=bits)
