"""Item-by-item event simulator.

Plays requests out one at a time against the energy budget and records what
the accelerator does. This is deliberately the slow, obvious route: it knows
nothing of the closed forms in :mod:`fpga_duty.analytic` and serves as their
brute-force oracle.

Energy is accumulated as exact integers (every float segment energy is a
dyadic rational, scaled onto a common power-of-two denominator), so the
budget check never suffers rounding drift, even over millions of items.

Timeline conventions:

* t = 0 is the arrival of the first request; request k arrives at k * T_req.
* Idle-Waiting's one-time configuration completes at t = 0, so it appears
  as a zero-length configuration segment that charges the initial overhead.
* The trace ends with a ``BudgetExhausted`` event at n_max * T_req, the
  first request that can no longer be served.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import List, Optional

from .errors import OutOfRange
from .model import Phase, StrategyKind, StrategyOutcome, fits_period, idle_energy, idle_time

DEFAULT_MAX_EVENTS = 10_000


class TraceDetail(str, Enum):
    FULL = "full"
    COUNTS_ONLY = "counts"


class EventKind(str, Enum):
    PHASE_START = "PhaseStart"
    PHASE_END = "PhaseEnd"
    IDLE_START = "IdleStart"
    IDLE_END = "IdleEnd"
    POWER_OFF = "PowerOff"
    POWER_ON = "PowerOn"
    # marks the point where the event log was truncated
    ELIDED = "Elided"
    BUDGET_EXHAUSTED = "BudgetExhausted"


@dataclass(frozen=True)
class TraceEvent:
    timestamp_ms: float
    kind: EventKind
    phase: Optional[Phase]
    cumulative_uj: float


@dataclass
class TraceResult:
    outcome: StrategyOutcome
    items_completed: int
    events: List[TraceEvent] = field(default_factory=list)
    # number of events dropped after the cap was reached
    elided: int = 0


class _Ledger:
    """Exact energy accumulator over a fixed power-of-two denominator."""

    def __init__(self, *values):
        fractions = [Fraction(v) for v in values]
        self.scale = max(f.denominator for f in fractions)
        self.total = 0

    def units(self, value) -> int:
        f = Fraction(value) * self.scale
        assert f.denominator == 1
        return f.numerator

    def as_float(self) -> float:
        return float(Fraction(self.total, self.scale))


def run_trace(strategy: StrategyKind, inp, request_period_ms: float,
              trace_detail: TraceDetail = TraceDetail.FULL,
              max_events: int = DEFAULT_MAX_EVENTS) -> TraceResult:
    strategy = StrategyKind(strategy)
    trace_detail = TraceDetail(trace_detail)
    on_off = strategy is StrategyKind.ON_OFF
    profile = inp.on_off if on_off else inp.idle_wait
    period = float(request_period_ms)
    latency = profile.latency()

    if not fits_period(latency, period):
        infeasible = StrategyOutcome(strategy, period, 0, 0.0, 0.0, False)
        return TraceResult(infeasible, 0)

    phase_energies = [p.energy() for p in profile.phases]
    gap = 0.0 if on_off else idle_energy(profile, period)
    init = 0.0 if on_off else inp.init_energy_uj
    budget = inp.spec.budget_uj

    ledger = _Ledger(budget, init, gap, *phase_energies)
    budget_u = ledger.units(budget)
    init_u = ledger.units(init)
    gap_u = ledger.units(gap)
    phase_u = [ledger.units(e) for e in phase_energies]
    item_u = sum(phase_u)

    full = trace_detail is TraceDetail.FULL
    events: List[TraceEvent] = []
    elided = 0

    def emit(t, kind, phase=None):
        nonlocal elided
        if not full:
            return
        if len(events) < max_events:
            events.append(TraceEvent(t, kind, phase, ledger.as_float()))
        else:
            if elided == 0:
                last = events[-1]
                events.append(TraceEvent(last.timestamp_ms, EventKind.ELIDED, None, last.cumulative_uj))
            elided += 1

    def play_item(start):
        t = start
        for p, units in zip(profile.phases, phase_u):
            emit(t, EventKind.PHASE_START, p.name)
            ledger.total += units
            t = t + p.time_ms
            emit(t, EventKind.PHASE_END, p.name)
        return t

    n = 0
    end = 0.0
    if on_off:
        while ledger.total + item_u <= budget_u:
            if not full or elided:
                # log is capped: nothing left to record, finish by counting
                ledger.total += item_u
                n += 1
                continue
            # max() keeps the log monotone when rounding puts the last phase end past the next start
            start = max(n * period, end)
            emit(start, EventKind.POWER_ON)
            end = play_item(start)
            emit(end, EventKind.POWER_OFF)
            n += 1
    else:
        if init_u <= budget_u:
            emit(0.0, EventKind.POWER_ON)
            emit(0.0, EventKind.PHASE_START, Phase.CONFIGURATION)
            ledger.total += init_u
            emit(0.0, EventKind.PHASE_END, Phase.CONFIGURATION)
            while ledger.total + (gap_u if n else 0) + item_u <= budget_u:
                if not full or elided:
                    ledger.total += (gap_u if n else 0) + item_u
                    n += 1
                    continue
                start = max(n * period, end)
                if n:
                    emit(end, EventKind.IDLE_START)
                    ledger.total += gap_u
                    emit(start, EventKind.IDLE_END)
                end = play_item(start)
                n += 1

    if elided:
        # items after the cap were only counted; report every event they would have logged
        elided = _total_events(on_off, n, len(profile.phases)) - (len(events) - 1)
    if full:
        events.append(TraceEvent(max(n * period, end), EventKind.BUDGET_EXHAUSTED, None, ledger.as_float()))

    steady = sum(phase_energies) + gap
    outcome = StrategyOutcome(
        strategy=strategy,
        request_period_ms=period,
        n_max=n,
        lifetime_ms=n * period,
        per_period_energy_uj=steady,
        feasible=True,
        off_time_ms=idle_time(profile, period) if on_off else None,
        idle_time_ms=None if on_off else idle_time(profile, period),
    )
    return TraceResult(outcome, n, events, elided)


def _total_events(on_off: bool, n: int, n_phases: int) -> int:
    """Event count an uncapped trace of n items would hold, BudgetExhausted excluded."""
    if on_off:
        # PowerOn, a start/end pair per phase, PowerOff
        return n * (2 * n_phases + 2)
    # PowerOn and the configuration pair, then phase pairs plus an idle pair between items
    return 3 + n * 2 * n_phases + max(n - 1, 0) * 2


def energy_at(result: TraceResult, t_ms: float) -> float:
    """Cumulative energy at time ``t_ms``, interpolated linearly within a segment."""
    events = result.events
    if not events:
        raise OutOfRange("energy_at needs a full trace")
    stop = len(events)
    for i, e in enumerate(events):
        if e.kind is EventKind.ELIDED:
            stop = i
            break
    times = [e.timestamp_ms for e in events[:stop]]
    limit = times[-1] if stop < len(events) else events[-1].timestamp_ms
    if t_ms < 0 or t_ms > limit:
        raise OutOfRange(f"t = {t_ms} ms outside the recorded trace [0, {limit}] ms")
    i = bisect_right(times, t_ms) - 1
    here = events[i]
    if here.timestamp_ms == t_ms or i + 1 >= stop:
        return here.cumulative_uj
    nxt = events[i + 1]
    frac = (t_ms - here.timestamp_ms) / (nxt.timestamp_ms - here.timestamp_ms)
    return here.cumulative_uj + frac * (nxt.cumulative_uj - here.cumulative_uj)
