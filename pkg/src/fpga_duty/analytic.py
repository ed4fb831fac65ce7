"""Closed-form energy model for the On-Off and Idle-Waiting strategies.

On-Off pays the full item (configuration included) on every request and
draws nothing while powered off::

    E_sum(n) = n * E_item

Idle-Waiting configures once (``init_energy``) and idles between requests::

    E_sum(n) = E_init + n * E_item' + (n - 1) * P_idle * (T_req - T_latency')

``n_max`` is the largest ``n`` whose cumulative energy stays within the
budget, and the lifetime is ``n_max * T_req``.

Budget comparisons are decided in exact rational arithmetic over the float
phase energies, so the closed form and the trace simulator, which
accumulates item by item, agree to the last item.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

import numpy as np
from scipy.optimize import bisect

from .errors import InfeasiblePeriod
from .model import (
    ItemProfile,
    StrategyKind,
    StrategyOutcome,
    WorkloadSpec,
    fits_period,
    idle_energy,
    idle_time,
)

CROSS_POINT_XTOL_MS = 0.01


@dataclass(frozen=True)
class AnalyticInput:
    spec: WorkloadSpec
    on_off: ItemProfile
    idle_wait: ItemProfile
    init_energy_uj: float

    def __post_init__(self):
        if self.idle_wait.has_configuration:
            raise ValueError("the Idle-Waiting profile must not contain a configuration phase")
        if not (self.init_energy_uj >= 0 and math.isfinite(self.init_energy_uj)):
            raise ValueError("init_energy_uj must be finite and non-negative")

    @classmethod
    def from_item(cls, spec: WorkloadSpec, item: ItemProfile, *, idle_power_mw: Optional[float] = None,
                  init_energy_uj: Optional[float] = None) -> "AnalyticInput":
        """Derive both strategy profiles from one full item profile.

        The Idle-Waiting profile is the item without its configuration phase,
        and the one-time initial overhead defaults to that phase's energy.
        """
        if idle_power_mw is not None:
            item = item.with_idle_power(idle_power_mw)
        if init_energy_uj is None:
            init_energy_uj = item.configuration_energy()
        return cls(spec, item, item.without_configuration(), init_energy_uj)

    def with_idle_power(self, idle_power_mw: float) -> "AnalyticInput":
        return AnalyticInput(self.spec, self.on_off.with_idle_power(idle_power_mw),
                             self.idle_wait.with_idle_power(idle_power_mw), self.init_energy_uj)

    def with_budget(self, budget_uj: float) -> "AnalyticInput":
        spec = WorkloadSpec(budget_uj, self.spec.request_period_ms, self.spec.sweep)
        return AnalyticInput(spec, self.on_off, self.idle_wait, self.init_energy_uj)

    def profile(self, strategy: StrategyKind) -> ItemProfile:
        return self.on_off if StrategyKind(strategy) is StrategyKind.ON_OFF else self.idle_wait


@dataclass(frozen=True)
class CrossPoint:
    """Request period below which Idle-Waiting beats On-Off.

    ``request_period_ms`` is None when no cross point exists. ``bisection_ms``
    is the independent root found by bisecting the energy difference.
    """

    request_period_ms: Optional[float]
    exists: bool
    mode: str = "asymptotic"
    bisection_ms: Optional[float] = None


def _exact_item(profile: ItemProfile) -> Fraction:
    return sum((Fraction(p.energy()) for p in profile.phases), Fraction(0))


def e_sum_on_off(profile: ItemProfile, n: int) -> float:
    if n < 0:
        raise ValueError("n must be non-negative")
    return n * profile.item_energy()


def e_sum_idle_waiting(profile: ItemProfile, init_energy_uj: float, request_period_ms: float, n: int) -> float:
    if n < 0:
        raise ValueError("n must be non-negative")
    if not fits_period(profile.latency(), request_period_ms):
        raise InfeasiblePeriod(
            f"request period {request_period_ms} ms is shorter than the item latency {profile.latency()} ms")
    if n == 0:
        return init_energy_uj
    return init_energy_uj + n * profile.item_energy() + (n - 1) * idle_energy(profile, request_period_ms)


def validate_feasibility(strategy: StrategyKind, profile: ItemProfile, request_period_ms: float) -> bool:
    """Whether one item fits inside a request period.

    On-Off must fit the whole item, configuration included; Idle-Waiting only
    the configuration-free part.
    """
    if StrategyKind(strategy) is StrategyKind.IDLE_WAITING:
        profile = profile.without_configuration() if profile.has_configuration else profile
    return bool(fits_period(profile.latency(), request_period_ms))


def _terms(strategy: StrategyKind, inp: AnalyticInput, request_period_ms: float):
    """Exact (init, item, gap) energies of the cumulative sum for one strategy."""
    profile = inp.profile(strategy)
    if StrategyKind(strategy) is StrategyKind.ON_OFF:
        return Fraction(0), _exact_item(profile), Fraction(0)
    return (Fraction(inp.init_energy_uj), _exact_item(profile),
            Fraction(idle_energy(profile, request_period_ms)))


def _fits(terms, n: int, budget: Fraction) -> bool:
    init, item, gap = terms
    total = init if n == 0 else init + n * item + (n - 1) * gap
    return total <= budget


def _settle(terms, guess: int, budget: Fraction) -> int:
    n = max(int(guess), 0)
    while n > 0 and not _fits(terms, n, budget):
        n -= 1
    while _fits(terms, n + 1, budget):
        n += 1
    return n


def n_max(strategy: StrategyKind, inp: AnalyticInput, request_period_ms: float) -> int:
    """Largest item count whose cumulative energy does not exceed the budget."""
    strategy = StrategyKind(strategy)
    profile = inp.profile(strategy)
    if not validate_feasibility(strategy, profile, request_period_ms):
        raise InfeasiblePeriod(
            f"{strategy.value}: request period {request_period_ms} ms < item latency {profile.latency()} ms")
    init, item, gap = _terms(strategy, inp, request_period_ms)
    if item + gap == 0:
        raise ValueError("zero energy per request: the item count is unbounded")
    budget = Fraction(inp.spec.budget_uj)
    guess = math.floor((float(budget) - float(init) + float(gap)) / (float(item) + float(gap)))
    return _settle((init, item, gap), guess, budget)


def lifetime(n_max: int, request_period_ms: float) -> float:
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    return n_max * request_period_ms


def per_period_energy(strategy: StrategyKind, inp: AnalyticInput, request_period_ms: float) -> float:
    """Steady-state energy spent per request period."""
    profile = inp.profile(strategy)
    if StrategyKind(strategy) is StrategyKind.ON_OFF:
        return profile.item_energy()
    return profile.item_energy() + idle_energy(profile, request_period_ms)


def outcome(strategy: StrategyKind, inp: AnalyticInput, request_period_ms: float) -> StrategyOutcome:
    """Full analytic result at one period; infeasible periods are flagged, not raised."""
    strategy = StrategyKind(strategy)
    profile = inp.profile(strategy)
    feasible = validate_feasibility(strategy, profile, request_period_ms)
    n = n_max(strategy, inp, request_period_ms) if feasible else 0
    gap = idle_time(profile, request_period_ms) if feasible else None
    return StrategyOutcome(
        strategy=strategy,
        request_period_ms=request_period_ms,
        n_max=n,
        lifetime_ms=lifetime(n, request_period_ms),
        per_period_energy_uj=per_period_energy(strategy, inp, request_period_ms) if feasible else 0.0,
        feasible=feasible,
        off_time_ms=gap if strategy is StrategyKind.ON_OFF else None,
        idle_time_ms=gap if strategy is StrategyKind.IDLE_WAITING else None,
    )


@dataclass(frozen=True)
class GridResult:
    """Column-wise sweep result for one strategy (numpy arrays of equal length)."""

    strategy: StrategyKind
    periods_ms: np.ndarray
    n_max: np.ndarray
    feasible: np.ndarray
    lifetime_ms: np.ndarray
    per_period_energy_uj: np.ndarray
    gap_ms: np.ndarray

    def __len__(self):
        return len(self.periods_ms)

    def outcomes(self) -> list:
        gap_key = "off_time_ms" if self.strategy is StrategyKind.ON_OFF else "idle_time_ms"
        out = []
        for i in range(len(self)):
            feasible = bool(self.feasible[i])
            period = float(self.periods_ms[i])
            gap = float(self.gap_ms[i]) if feasible else None
            out.append(StrategyOutcome(
                strategy=self.strategy,
                request_period_ms=period,
                n_max=int(self.n_max[i]),
                lifetime_ms=float(self.lifetime_ms[i]),
                per_period_energy_uj=float(self.per_period_energy_uj[i]),
                feasible=feasible,
                **{gap_key: gap},
            ))
        return out


def evaluate_grid(strategy: StrategyKind, inp: AnalyticInput, periods_ms) -> GridResult:
    """Vectorised closed form over many periods.

    Float arithmetic settles almost every point; points whose cumulative
    energy lands within 1e-9 relative of the budget are re-decided exactly.
    """
    strategy = StrategyKind(strategy)
    profile = inp.profile(strategy)
    periods = np.asarray(periods_ms, dtype=np.float64)
    latency = profile.latency()
    feasible = fits_period(latency, periods)
    gaps = np.where(feasible, np.maximum(periods - latency, 0.0), 0.0)
    item = profile.item_energy()
    budget = inp.spec.budget_uj
    if strategy is StrategyKind.ON_OFF:
        init = 0.0
        gap_energy = np.zeros_like(periods)
    else:
        init = inp.init_energy_uj
        gap_energy = profile.idle_power_mw * gaps
    per_request = item + gap_energy
    if np.any(per_request[feasible] <= 0):
        raise ValueError("zero energy per request: the item count is unbounded")
    with np.errstate(divide="ignore", invalid="ignore"):
        guess = np.floor((budget - init + gap_energy) / per_request)
    guess = np.where(feasible, np.maximum(guess, 0), 0).astype(np.int64)

    def total(n):
        return np.where(n == 0, init, init + n * item + (n - 1) * gap_energy)

    tol = 1e-9 * budget
    e_n, e_next = total(guess), total(guess + 1)
    unsure = feasible & ((e_n > budget - tol) & (guess > 0) | (e_next <= budget + tol))
    exact_budget = Fraction(budget)
    for i in np.flatnonzero(unsure):
        terms = _terms(strategy, inp, float(periods[i]))
        guess[i] = _settle(terms, int(guess[i]), exact_budget)

    return GridResult(
        strategy=strategy,
        periods_ms=periods,
        n_max=guess,
        feasible=feasible,
        lifetime_ms=guess * periods,
        per_period_energy_uj=np.where(feasible, per_request, 0.0),
        gap_ms=gaps,
    )


def sweep(inp: AnalyticInput, strategies: Iterable[StrategyKind] = tuple(StrategyKind)) -> list:
    """One outcome per (strategy, period) grid point, infeasible points flagged."""
    periods = inp.spec.periods()
    out = []
    for strategy in strategies:
        out.extend(evaluate_grid(strategy, inp, periods).outcomes())
    return out


def _bisect_root(f, lo: float, hi: float) -> float:
    while f(hi) > 0:
        hi = lo + 2 * (hi - lo)
    return bisect(f, lo, hi, xtol=CROSS_POINT_XTOL_MS)


def cross_point(inp: AnalyticInput, mode: str = "asymptotic") -> CrossPoint:
    """Period at which both strategies cost the same.

    ``asymptotic`` equates steady-state energy per period, ignoring the
    one-time initial overhead. ``budget`` equates the (continuous) item counts
    at the workload's finite budget, so the overhead is charged once.
    """
    # exact arithmetic over the float inputs: near-degenerate budgets would
    # otherwise lose every significant digit to cancellation
    e_on_off = _exact_item(inp.on_off)
    e_idle_item = _exact_item(inp.idle_wait)
    p_idle = Fraction(inp.idle_wait.idle_power_mw)
    latency = inp.idle_wait.latency()
    lat = Fraction(latency)
    if p_idle <= 0:
        raise ValueError("cross point needs a positive idle power")

    if mode == "asymptotic":
        if e_on_off < e_idle_item:
            return CrossPoint(None, False, mode)
        gap_energy = e_on_off - e_idle_item

        def diff(t):
            return float(e_on_off - (e_idle_item + p_idle * (Fraction(t) - lat)))

    elif mode == "budget":
        budget = Fraction(inp.spec.budget_uj)
        init = Fraction(inp.init_energy_uj)
        if budget <= e_on_off:
            return CrossPoint(None, False, mode)
        gap_energy = (budget * (e_on_off - e_idle_item) - e_on_off * init) / (budget - e_on_off)
        if gap_energy < 0:
            return CrossPoint(None, False, mode)

        def diff(t):
            # continuous Idle-Waiting count minus On-Off count, cross-multiplied
            x = p_idle * (Fraction(t) - lat)
            return float((budget - init + x) * e_on_off - budget * (e_idle_item + x))

    else:
        raise ValueError(f"unknown cross point mode {mode!r}")

    period = float(gap_energy / p_idle + lat)
    if gap_energy == 0:
        return CrossPoint(period, True, mode, period)
    root = _bisect_root(diff, latency, latency + 2 * (period - latency) + 1.0)
    if abs(root - period) > CROSS_POINT_XTOL_MS:
        raise ArithmeticError(f"closed-form cross point {period} disagrees with bisection {root}")
    return CrossPoint(period, True, mode, root)
