"""Exhaustive tiny-scale verification of deterministic schedule sets.

The executable analog of a probabilistic-method existence argument: enumerate
every canonical wake-up pattern of up to k of N stations inside a window,
simulate each, and demand that every woken station succeeds within the latency
bound. A seed search over a schedule family then finds a concrete seed whose
materialized schedules survive the full enumeration.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import Callable, Iterator, Mapping

from .channel import ChannelMode
from .engine import SimConfig, run
from .schedules import DeterministicSchedule, SchedulePlan, materialize
from .wakeup import WakeUpPattern

INT63_MAX = (1 << 63) - 1


class BudgetExceededError(RuntimeError):
    """Pattern space larger than the exhaustive-verification budget."""


class ScheduleTooShortError(ValueError):
    """A schedule does not cover latency_bound + window rounds."""


@dataclass(frozen=True)
class VerifySpec:
    N: int
    k: int
    window: int
    latency_bound: int
    mode: ChannelMode
    budget: int = 10**8

    def __post_init__(self) -> None:
        if not 1 <= self.k <= self.N:
            raise ValueError("need 1 <= k <= N")
        if self.window < 1 or self.latency_bound < 1:
            raise ValueError("window and latency_bound must be >= 1")


@dataclass(frozen=True)
class Counterexample:
    pattern: WakeUpPattern
    failing_station: int


@dataclass(frozen=True)
class VerifyResult:
    counterexample: Counterexample | None = None

    @property
    def passed(self) -> bool:
        return self.counterexample is None


def pattern_count(spec: VerifySpec) -> int:
    """Number of canonical patterns: sum over m of C(N,m) * (W^m - (W-1)^m)."""
    total = 0
    w = spec.window
    for m in range(1, spec.k + 1):
        total += math.comb(spec.N, m) * (w**m - (w - 1) ** m)
    if total > INT63_MAX:
        raise OverflowError(f"pattern count {total} exceeds 2^63-1")
    return total


def enumerate_patterns(spec: VerifySpec) -> Iterator[WakeUpPattern]:
    """Yield each canonical pattern once: subsets in lexicographic id order,
    wake assignments in mixed-radix order, earliest wake pinned to slot 1."""
    pattern_count(spec)  # overflow guard
    w = spec.window
    for m in range(1, spec.k + 1):
        for subset in itertools.combinations(range(spec.N), m):
            for wakes in itertools.product(range(1, w + 1), repeat=m):
                if min(wakes) != 1:
                    continue
                yield WakeUpPattern(dict(zip(subset, wakes)))


def _check_pattern(
    schedules: Mapping[int, DeterministicSchedule],
    pattern: WakeUpPattern,
    spec: VerifySpec,
) -> int | None:
    """Smallest failing station id under this pattern, or None if all make the bound."""
    cap = pattern.max_wake() + spec.latency_bound - 1
    report = run(schedules, pattern, SimConfig(mode=spec.mode, horizon_cap=cap))
    lat = report.latency
    bad = [v for v in report.stations if v in report.failures or lat[v] > spec.latency_bound]
    return min(bad) if bad else None


def verify(
    schedules: Mapping[int, DeterministicSchedule],
    spec: VerifySpec,
    jobs: int = 1,
    progress: Callable[[int], None] | None = None,
) -> VerifyResult:
    """Pass iff every woken station of every enumerated pattern meets the bound.

    The counterexample, if any, is the first in enumeration order; with jobs > 1
    the pattern stream is partitioned by index and the minimum failing index wins,
    so the result is independent of the worker count.
    """
    needed = spec.latency_bound + spec.window
    for v in range(spec.N):
        if v not in schedules:
            raise ScheduleTooShortError(f"no schedule for station {v}")
        if schedules[v].horizon < needed:
            raise ScheduleTooShortError(
                f"station {v} schedule covers {schedules[v].horizon} rounds, needs {needed}"
            )
    total = pattern_count(spec)
    if total > spec.budget:
        raise BudgetExceededError(
            f"pattern space {total} exceeds budget {spec.budget}; use Monte Carlo instead"
        )
    if jobs > 1:
        return _verify_parallel(schedules, spec, total, jobs)
    for i, pattern in enumerate(enumerate_patterns(spec)):
        if progress is not None:
            progress(i)
        failing = _check_pattern(schedules, pattern, spec)
        if failing is not None:
            return VerifyResult(Counterexample(pattern, failing))
    return VerifyResult()


def _verify_slice(args) -> tuple[int, int] | None:
    schedules, spec, start, stop = args
    it = itertools.islice(enumerate_patterns(spec), start, stop)
    for i, pattern in enumerate(it, start=start):
        failing = _check_pattern(schedules, pattern, spec)
        if failing is not None:
            return i, failing
    return None


def _verify_parallel(
    schedules: Mapping[int, DeterministicSchedule],
    spec: VerifySpec,
    total: int,
    jobs: int,
) -> VerifyResult:
    from concurrent.futures import ProcessPoolExecutor

    bounds = [round(total * j / jobs) for j in range(jobs + 1)]
    tasks = [(schedules, spec, lo, hi) for lo, hi in zip(bounds, bounds[1:]) if hi > lo]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        hits = [h for h in pool.map(_verify_slice, tasks) if h is not None]
    if not hits:
        return VerifyResult()
    index, failing = min(hits)
    pattern = next(itertools.islice(enumerate_patterns(spec), index, index + 1))
    return VerifyResult(Counterexample(pattern, failing))


def search_schedule(
    template: SchedulePlan,
    spec: VerifySpec,
    max_seeds: int,
    jobs: int = 1,
) -> tuple[int, dict[int, DeterministicSchedule]] | None:
    """Try seeds 0..max_seeds-1; return the first whose schedules verify Pass."""
    if max_seeds < 1:
        raise ValueError("max_seeds must be >= 1")
    needed = spec.latency_bound + spec.window
    if template.horizon < needed:
        raise ScheduleTooShortError(
            f"family horizon {template.horizon} shorter than latency_bound+window={needed}"
        )
    for seed in range(max_seeds):
        plan = replace(template, seed=seed)
        schedules = {v: materialize(plan, v, needed) for v in range(spec.N)}
        if verify(schedules, spec, jobs=jobs).passed:
            return seed, schedules
    return None


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    p = successes / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = (z / denom) * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials))
    return max(0.0, center - half), min(1.0, center + half)


def monte_carlo_failure_rate(
    schedules: Mapping[int, object],
    pattern_for_trial: Callable[[int], WakeUpPattern],
    trials: int,
    mode: ChannelMode,
    horizon_cap: int | None = None,
) -> tuple[float, tuple[float, float]]:
    """Fraction of sampled patterns with at least one failing station, with 95% CI."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    failures = 0
    for trial in range(trials):
        pattern = pattern_for_trial(trial)
        report = run(schedules, pattern, SimConfig(mode=mode, horizon_cap=horizon_cap))
        if report.failures:
            failures += 1
    return failures / trials, wilson_interval(failures, trials)
