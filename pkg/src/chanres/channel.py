"""Domain types for stations, slots, and the channel's collision rule.

A slot carries one of three outcomes: silence (nobody transmitted),
success (exactly one transmitter; its packet is delivered) or collision
(two or more transmitters; nothing is heard, and no special collision
signal exists on the channel).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable

StationId = int


class ChannelMode(enum.Enum):
    ACK = "ack"
    NOACK = "noack"

    @classmethod
    def parse(cls, text: str) -> "ChannelMode":
        try:
            return cls(text.lower())
        except ValueError:
            raise ValueError(f"unknown channel mode {text!r} (expected 'ack' or 'noack')")


class OutcomeKind(enum.Enum):
    SILENCE = "S"
    SUCCESS = "W"
    COLLISION = "C"


@dataclass(frozen=True)
class SlotOutcome:
    """Result of one slot: Silence, Success(winner) or Collision(count)."""

    kind: OutcomeKind
    winner: StationId | None = None
    count: int = 0

    def __post_init__(self) -> None:
        if self.kind is OutcomeKind.SUCCESS:
            if self.winner is None or self.count != 1:
                raise ValueError("Success carries exactly one station")
        elif self.kind is OutcomeKind.COLLISION:
            if self.count < 2:
                raise ValueError("Collision count must be >= 2")
        elif self.count != 0 or self.winner is not None:
            raise ValueError("Silence carries no transmitters")

    @property
    def is_success(self) -> bool:
        return self.kind is OutcomeKind.SUCCESS

    @property
    def is_collision(self) -> bool:
        return self.kind is OutcomeKind.COLLISION

    @property
    def is_silence(self) -> bool:
        return self.kind is OutcomeKind.SILENCE


SILENCE = SlotOutcome(OutcomeKind.SILENCE)


def success(winner: StationId) -> SlotOutcome:
    return SlotOutcome(OutcomeKind.SUCCESS, winner=winner, count=1)


def collision(count: int) -> SlotOutcome:
    return SlotOutcome(OutcomeKind.COLLISION, count=count)


def resolve_slot(transmitters: Iterable[StationId]) -> SlotOutcome:
    """Collision-channel rule: a slot succeeds iff exactly one station transmits."""
    ts = set(transmitters)
    if not ts:
        return SILENCE
    if len(ts) == 1:
        return success(next(iter(ts)))
    return collision(len(ts))


@dataclass(frozen=True)
class InstanceParams:
    """Problem instance: N attached stations, at most k of them contend."""

    N: int
    k: int
    mode: ChannelMode

    def __post_init__(self) -> None:
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if not 1 <= self.k <= self.N:
            raise ValueError(f"contention bound k must satisfy 1 <= k <= N, got k={self.k}, N={self.N}")
