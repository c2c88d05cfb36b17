"""Deterministic slot-synchronous execution of schedules against a wake-up pattern.

The engine walks global slots in chunks. For each chunk it assembles the
boolean transmission matrix (stations x slots) from the lazy schedules, counts
transmitters per slot, and resolves successes. In ack mode a winner stops
transmitting after its success slot, which only affects later slots, so one
left-to-right pass with incremental count fix-ups is exact.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .channel import ChannelMode, SlotOutcome, resolve_slot
from .wakeup import WakeUpPattern

CHUNK_SLOTS = 8192


@dataclass(frozen=True)
class SimConfig:
    mode: ChannelMode
    horizon_cap: int | None = None  # None: run every schedule to its end
    record_trace: bool = False
    seed: int = 0  # provenance only; schedules carry their own seeds

    def __post_init__(self) -> None:
        if self.horizon_cap is not None and self.horizon_cap < 1:
            raise ValueError("horizon_cap must be >= 1")


@dataclass(frozen=True)
class TraceEntry:
    slot: int
    outcome: SlotOutcome
    transmitters: tuple[int, ...]


@dataclass
class SimTrace:
    entries: list[TraceEntry] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass
class SimReport:
    """Per-station wake/success/latency plus run-level metrics.

    A station with no successful slot appears in `failures` and has no
    latency entry; `max_latency` and `utilization` are None unless every
    woken station succeeded.
    """

    wake: dict[int, int]
    success_slot: dict[int, int]
    failures: set[int]
    slots_simulated: int
    trace: SimTrace | None = None

    @property
    def stations(self) -> list[int]:
        return sorted(self.wake)

    @property
    def latency(self) -> dict[int, int]:
        return {v: s - self.wake[v] + 1 for v, s in self.success_slot.items()}

    @property
    def max_latency(self) -> int | None:
        if self.failures or not self.success_slot:
            return None
        return max(self.latency.values())

    @property
    def utilization(self) -> float | None:
        if self.max_latency is None:
            return None
        return len(self.wake) / self.max_latency


def utilization(report: SimReport, k: int) -> float:
    """Channel utilization k / max_latency; undefined while any station failed."""
    if report.failures:
        raise ValueError(f"utilization undefined: stations {sorted(report.failures)} failed")
    if report.max_latency is None:
        raise ValueError("utilization undefined: empty report")
    return k / report.max_latency


def run(
    schedules: Mapping[int, object],
    pattern: WakeUpPattern,
    config: SimConfig,
) -> SimReport:
    """Execute the schedules under the wake-up pattern.

    `schedules` maps every woken station to an object with `.horizon`,
    `.bits_range(lo, hi)` (a DeterministicSchedule or PlanSchedule). Station v
    woken at slot w transmits at global slot t iff its bit at local round
    t - w + 1 is set and, in ack mode, it has not yet succeeded.
    """
    stations = pattern.stations()
    if not stations:
        raise ValueError("pattern wakes no stations")
    if not pattern.is_normalized():
        raise ValueError("pattern must be normalized (earliest wake at slot 1)")
    missing = [v for v in stations if v not in schedules]
    if missing:
        raise ValueError(f"no schedule for woken stations {missing}")

    wakes = np.array([pattern.wake(v) for v in stations], dtype=np.int64)
    horizons = np.array([schedules[v].horizon for v in stations], dtype=np.int64)
    ends = wakes + horizons - 1  # last global slot each schedule covers
    stop = int(ends.max()) if len(ends) else 0
    if config.horizon_cap is not None:
        stop = min(stop, config.horizon_cap)

    ack = config.mode is ChannelMode.ACK
    success_slot: dict[int, int] = {}
    done = np.zeros(len(stations), dtype=bool)
    trace = SimTrace() if config.record_trace else None

    t0 = 1
    while t0 <= stop and not done.all():
        t1 = min(t0 + CHUNK_SLOTS - 1, stop)
        width = t1 - t0 + 1
        m = np.zeros((len(stations), width), dtype=bool)
        for idx, v in enumerate(stations):
            if ack and done[idx]:
                continue
            lo = max(1, t0 - wakes[idx] + 1)
            hi = min(horizons[idx], t1 - wakes[idx] + 1)
            if hi < lo:
                continue
            col0 = int(wakes[idx] + lo - 1 - t0)
            m[idx, col0 : col0 + (hi - lo + 1)] = schedules[v].bits_range(int(lo), int(hi))
        counts = m.sum(axis=0, dtype=np.int32)

        if ack:
            pos = 0
            while True:
                solo = np.flatnonzero(counts[pos:] == 1)
                if solo.size == 0:
                    break
                t = pos + int(solo[0])
                widx = int(np.flatnonzero(m[:, t])[0])
                # first solo of a still-active station is its success
                success_slot[stations[widx]] = t0 + t
                done[widx] = True
                tail = m[widx, t + 1 :]
                counts[t + 1 :] -= tail
                m[widx, t + 1 :] = False
                pos = t + 1
        else:
            solo = counts == 1
            hits = m & solo[np.newaxis, :]
            has_hit = hits.any(axis=1)
            firsts = np.argmax(hits, axis=1)
            for idx in np.flatnonzero(has_hit & ~done):
                success_slot[stations[idx]] = t0 + int(firsts[idx])
                done[idx] = True

        if trace is not None:
            for col in range(width):
                transmitters = tuple(stations[i] for i in np.flatnonzero(m[:, col]))
                trace.entries.append(
                    TraceEntry(slot=t0 + col, outcome=resolve_slot(transmitters), transmitters=transmitters)
                )
        t0 = t1 + 1

    simulated = min(stop, t0 - 1)
    failures = {v for v in stations if v not in success_slot}
    return SimReport(
        wake={v: pattern.wake(v) for v in stations},
        success_slot=success_slot,
        failures=failures,
        slots_simulated=simulated,
        trace=trace,
    )


def fmt_float(x: float) -> str:
    return f"{x:.9g}"


def report_csv(report: SimReport, k: int | None = None) -> str:
    """Render the two-section report CSV (per-station rows, then one summary row)."""
    k = len(report.wake) if k is None else k
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["station", "wake", "success_slot", "latency"])
    lat = report.latency
    for v in report.stations:
        if v in report.success_slot:
            w.writerow([v, report.wake[v], report.success_slot[v], lat[v]])
        else:
            w.writerow([v, report.wake[v], -1, -1])
    w.writerow(["k", "max_latency", "failures", "utilization"])
    failed = ";".join(str(v) for v in sorted(report.failures))
    if report.max_latency is None:
        w.writerow([k, -1, failed, -1])
    else:
        w.writerow([k, report.max_latency, failed, fmt_float(k / report.max_latency)])
    return buf.getvalue()


def trace_csv(trace: SimTrace) -> str:
    """Render the trace CSV: slot, outcome in {S,W,C}, winner_id or -1, num_transmitters."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["slot", "outcome", "winner_id", "num_transmitters"])
    for e in trace.entries:
        winner = e.outcome.winner if e.outcome.is_success else -1
        w.writerow([e.slot, e.outcome.kind.value, winner, len(e.transmitters)])
    return buf.getvalue()


def write_text(path: str | Path, text: str) -> None:
    with open(path, "w", newline="") as f:
        f.write(text)
