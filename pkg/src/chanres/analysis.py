"""Exact numeric evaluation of the analytic quantities behind the schedule families.

Each checker computes both sides of an inequality exactly (float64 on the
true finite sums, no integral shortcuts) and reports the number of violations
and the worst margin over its sweep, so a passing report certifies the
inequality pointwise on the swept range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .prng import derive_seed
from .schedules import Family, ProbabilityProfile, SchedulePlan, phase_probabilities
from .wakeup import WakeUpPattern


@dataclass
class CheckReport:
    """Outcome of one inequality sweep."""

    name: str
    params: dict = field(default_factory=dict)
    sweep_size: int = 0
    violations: int = 0
    worst_margin: float = math.inf  # min(bound - value); negative means violated
    first_violation: tuple | None = None  # (where, value, bound)

    @property
    def passed(self) -> bool:
        return self.violations == 0


def prefix_sum_series(plan: SchedulePlan, r_max: int) -> np.ndarray:
    """s(r) = p(1) + ... + p(r) for r = 1..r_max (index r-1), exact to float64.

    s is linear inside each phase, so it is assembled from exact phase-boundary
    sums rather than a length-r_max cumulative sum.
    """
    if r_max < 1:
        raise ValueError("r_max must be >= 1")
    if r_max > plan.horizon:
        raise ValueError(f"r_max {r_max} beyond schedule horizon {plan.horizon}")
    T = plan.T
    n_phases = (r_max - 1) // T + 1
    p = phase_probabilities(plan, n_phases)
    boundaries = np.concatenate([[0.0], np.cumsum(T * p)])
    r = np.arange(1, r_max + 1, dtype=np.int64)
    idx = (r - 1) // T
    j = (r - 1) % T + 1
    return boundaries[idx] + j * p[idx]


def sigma_series(
    profiles: Mapping[int, ProbabilityProfile],
    pattern: WakeUpPattern,
    reference: int,
    r_max: int,
) -> np.ndarray:
    """Sum of transmission probabilities at rounds 1..r_max of the reference's clock.

    sigma(r) = sum over woken stations w of p_w(r - Delta), Delta = wake_w -
    wake_ref; the reference contributes its own probability. Stations outside
    their schedule (not yet woken, or past their horizon) contribute 0.
    No-ack semantics: probabilities never decay on success.
    """
    if reference not in pattern.wakes:
        raise ValueError(f"reference station {reference} not in pattern")
    rounds = np.arange(1, r_max + 1, dtype=np.int64)
    sigma = np.zeros(r_max, dtype=np.float64)
    ref_wake = pattern.wake(reference)
    for w in pattern.stations():
        if w not in profiles:
            raise ValueError(f"no probability profile for woken station {w}")
        delta = pattern.wake(w) - ref_wake
        sigma += profiles[w].at_rounds(rounds - delta)
    return sigma


def success_prob_exact(p_v: float, other_probs: Sequence[float]) -> float:
    """Exact probability that v transmits solo: p_v * prod(1 - p_w)."""
    for p in [p_v, *other_probs]:
        if not 0.0 <= p <= 0.5:
            raise ValueError(f"probability out of range [0, 1/2]: {p}")
    result = p_v
    for p in other_probs:
        result *= 1.0 - p
    return result


@dataclass
class SuccessBounds:
    exact: float
    sigma: float
    bound_4sigma: float
    bound_16th: float | None  # p_v/16, asserted only when sigma <= 2
    ok: bool


def check_success_lower_bounds(p_v: float, other_probs: Sequence[float]) -> SuccessBounds:
    """Exact solo-success probability against p_v*4^-sigma and p_v/16.

    sigma sums every active probability including p_v itself, which makes the
    4^-sigma bound strict whenever p_v > 0; strictness is only required when
    another station is active.
    """
    exact = success_prob_exact(p_v, other_probs)
    sigma = p_v + float(sum(other_probs))
    bound4 = p_v * 4.0**-sigma
    ok = exact > bound4 if other_probs else exact >= bound4
    bound16 = None
    if sigma <= 2.0:
        bound16 = p_v / 16.0
        ok = ok and exact > bound16
    return SuccessBounds(exact=exact, sigma=sigma, bound_4sigma=bound4, bound_16th=bound16, ok=ok)


def at_most_one_exact(probs: Sequence[float]) -> float:
    """Exact P(at most one of the independent events occurs)."""
    probs = list(probs)
    for p in probs:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"probability out of range [0, 1]: {p}")
    none = math.prod(1.0 - p for p in probs)
    one = 0.0
    for j, pj in enumerate(probs):
        one += pj * math.prod(1.0 - p for i, p in enumerate(probs) if i != j)
    return none + one


def at_most_one_bound(probs: Sequence[float]) -> tuple[float, float]:
    """(exact P, analytic bound (s+1)e^(1-s)) for probabilities summing to s >= 1."""
    s = float(sum(probs))
    if s < 1.0:
        raise ValueError(f"bound requires sum of probabilities >= 1, got {s}")
    exact = at_most_one_exact(probs)
    return exact, (s + 1.0) * math.exp(1.0 - s)


def check_prefix_sum_spord(b: float, N: int, r_max: int) -> CheckReport:
    """Sweep s(r) < 2*sqrt(r*b*ln N) for the 1/sqrt(i) decay profile."""
    plan = SchedulePlan(family=Family.SPORD, N=N, b=b)
    s = prefix_sum_series(plan, r_max)
    r = np.arange(1, r_max + 1, dtype=np.float64)
    bound = 2.0 * np.sqrt(r * b * math.log(N))
    margins = bound - s
    bad = np.flatnonzero(margins <= 0.0)
    report = CheckReport(
        name="spord-prefix-sum",
        params={"b": b, "N": N, "r_max": r_max},
        sweep_size=r_max,
        violations=int(bad.size),
        worst_margin=float(margins.min()),
    )
    if bad.size:
        i = int(bad[0])
        report.first_violation = (i + 1, float(s[i]), float(bound[i]))
    return report


def check_prefix_sum_spordack(N: int, r_max: int) -> CheckReport:
    """Sweep s(r) < 2*sqrt(T*r*ln r) for the sqrt(ln i / i) decay profile, r >= 2."""
    if r_max < 2:
        raise ValueError("r_max must be >= 2 (ln r must be positive)")
    plan = SchedulePlan(family=Family.SPORDACK, N=N, c=1.0)
    if r_max > plan.horizon:
        # c only sets the schedule length; stretch it to cover the sweep
        plan = SchedulePlan(
            family=Family.SPORDACK, N=N, c=math.ceil(r_max * math.log(N) / (N * N)) + 1.0
        )
    s = prefix_sum_series(plan, r_max)[1:]
    r = np.arange(2, r_max + 1, dtype=np.float64)
    bound = 2.0 * np.sqrt(plan.T * r * np.log(r))
    margins = bound - s
    bad = np.flatnonzero(margins <= 0.0)
    report = CheckReport(
        name="spordack-prefix-sum",
        params={"N": N, "T": plan.T, "r_max": r_max},
        sweep_size=r_max - 1,
        violations=int(bad.size),
        worst_margin=float(margins.min()),
    )
    if bad.size:
        i = int(bad[0])
        report.first_violation = (i + 2, float(s[i]), float(bound[i]))
    return report


def low_sigma_requirement(plan: SchedulePlan, k: int) -> tuple[int, float, float, bool]:
    """(interval length, sigma threshold, required count, strict) for the plan's family."""
    T = plan.T
    if plan.family is Family.SPORD:
        phases = 16 * k * k
        return phases * T, 1.0, phases * T / 2.0, True
    if plan.family is Family.SPORDACK:
        if k < 2:
            raise ValueError("spordack counting needs k >= 2 (ln k must be positive)")
        phases = math.ceil(plan.c * k * k / math.log(k))
        return phases * T, 4.0 * math.sqrt(2.0) * math.log(k), phases * T / 2.0, False
    raise ValueError(f"no low-sigma requirement for family {plan.family.value}")


def check_low_sigma_fraction(
    plan: SchedulePlan,
    k: int,
    pattern: WakeUpPattern,
    reference: int | None = None,
) -> CheckReport:
    """Count rounds with small sigma over the family's analysis interval.

    spord: at least half of the rounds in [1, 16k^2*T] of the reference's clock
    must have sigma < 1. spordack: at least half of [1, ceil(c*k^2/ln k)*T]
    must have sigma <= 4*sqrt(2)*ln k. Checked for every woken reference when
    `reference` is None.
    """
    if len(pattern) > k:
        raise ValueError(f"pattern wakes {len(pattern)} stations, contention bound is {k}")
    r_len, threshold, required, strict = low_sigma_requirement(plan, k)
    profile = ProbabilityProfile(plan)
    profiles = {v: profile for v in pattern.stations()}
    refs = pattern.stations() if reference is None else [reference]
    worst = math.inf
    violations = 0
    first = None
    for ref in refs:
        sigma = sigma_series(profiles, pattern, ref, r_len)
        count = int((sigma < threshold).sum() if strict else (sigma <= threshold).sum())
        margin = count - required
        if margin < worst:
            worst = margin
        if count < required:
            violations += 1
            if first is None:
                first = (ref, count, required)
    return CheckReport(
        name=f"{plan.family.value}-low-sigma",
        params={"k": k, "interval": r_len, "threshold": threshold},
        sweep_size=len(refs),
        violations=violations,
        worst_margin=worst,
        first_violation=first,
    )


def uniform_wake_density(
    schedules: Sequence,
    window: int,
    t_lo: int,
    t_hi: int,
    samples: int,
    seed: int,
) -> np.ndarray:
    """Mean scheduled-transmission count per global slot under uniform random wakes.

    This is the wake-time-randomized sigma of the lower-bound argument (an
    expectation over wake times of deterministic schedules), distinct from the
    profile-based sigma_series. Estimated by Monte Carlo over `samples` draws.
    """
    if t_lo < 1 or t_hi < t_lo:
        raise ValueError("need 1 <= t_lo <= t_hi")
    rng = np.random.Generator(np.random.PCG64(derive_seed(seed, 0x64656E73)))
    width = t_hi - t_lo + 1
    totals = np.zeros(width, dtype=np.float64)
    for _ in range(samples):
        wakes = rng.integers(1, window + 1, size=len(schedules))
        for sched, wake in zip(schedules, wakes):
            lo = max(1, t_lo - int(wake) + 1)
            hi = min(sched.horizon, t_hi - int(wake) + 1)
            if hi < lo:
                continue
            col0 = int(wake) + lo - 1 - t_lo
            totals[col0 : col0 + (hi - lo + 1)] += sched.bits_range(lo, hi)
    return totals / samples


def lemma_interval_floor(a: float, b: float, c: float, k: int, x: int) -> float:
    """Analytic floor a*x*log2(b*k)/(c*k*b^2) on the wake-averaged density."""
    return a * x * math.log2(b * k) / (c * k * b * b)


def success_bounds_sweep(n_configs: int, seed: int) -> CheckReport:
    """Random (p_v, others) configurations with sigma <= 2 against both lower bounds."""
    rng = np.random.Generator(np.random.PCG64(derive_seed(seed, 0x73756363)))
    worst = math.inf
    violations = 0
    first = None
    for trial in range(n_configs):
        while True:
            p_v = 0.5 * float(rng.uniform(1e-9, 1.0))
            others = (0.5 * rng.uniform(1e-9, 1.0, size=int(rng.integers(0, 7)))).tolist()
            if p_v + sum(others) <= 2.0:
                break
        res = check_success_lower_bounds(p_v, others)
        margin = res.exact - max(res.bound_4sigma, res.bound_16th or 0.0)
        worst = min(worst, margin)
        if not res.ok:
            violations += 1
            if first is None:
                first = (trial, res.exact, res.bound_4sigma)
    return CheckReport(
        name="success-lower-bounds",
        params={"configs": n_configs, "seed": seed},
        sweep_size=n_configs,
        violations=violations,
        worst_margin=worst,
        first_violation=first,
    )


def at_most_one_sweep(n_vectors: int, seed: int, max_len: int = 20, s_max: float = 6.0) -> CheckReport:
    """Random probability vectors (sum in [1, s_max]) against (s+1)e^(1-s)."""
    rng = np.random.Generator(np.random.PCG64(derive_seed(seed, 0x61746D6F)))
    worst = math.inf
    violations = 0
    first = None
    for trial in range(n_vectors):
        while True:
            s = float(rng.uniform(1.0, s_max))
            m = int(rng.integers(max(2, math.ceil(s)), max_len + 1))
            weights = rng.random(m) + 1e-12
            probs = (s * weights / weights.sum()).tolist()
            if max(probs) <= 1.0:
                break
        exact, bound = at_most_one_bound(probs)
        worst = min(worst, bound - exact)
        if exact > bound:
            violations += 1
            if first is None:
                first = (trial, exact, bound)
    return CheckReport(
        name="at-most-one",
        params={"vectors": n_vectors, "seed": seed},
        sweep_size=n_vectors,
        violations=violations,
        worst_margin=worst,
        first_violation=first,
    )
