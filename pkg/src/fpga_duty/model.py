"""Domain types for duty-cycled FPGA accelerators.

All quantities are plain floats in a fixed unit system:

* power in milliwatts (mW)
* time in milliseconds (ms)
* energy in microjoules (uJ)

so that ``mW * ms == uJ`` without conversion factors. Item counts are ints.
Field names carry their unit as a suffix (``power_mw``, ``time_ms``...).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DuplicatePhase, SchemaError, UnitError

UJ_PER_J = 1e6
UJ_PER_MJ = 1e3
MS_PER_S = 1e3
MS_PER_H = 3.6e6
LATENCY_RTOL = 1e-12


class Phase(str, Enum):
    """Lifecycle phases of one workload item, in execution order."""

    CONFIGURATION = "configuration"
    DATA_LOADING = "data_loading"
    INFERENCE = "inference"
    DATA_OFFLOADING = "data_offloading"


PHASE_ORDER = tuple(Phase)


class StrategyKind(str, Enum):
    ON_OFF = "on-off"
    IDLE_WAITING = "idle-waiting"


def _check_quantity(value, what):
    if isinstance(value, bool) or not isinstance(value, (int, float, np.floating, np.integer)):
        raise UnitError(f"{what} must be a number, got {value!r}", field=what)
    value = float(value)
    if not math.isfinite(value):
        raise UnitError(f"{what} must be finite, got {value}", field=what)
    if value < 0:
        raise UnitError(f"{what} must be non-negative, got {value}", field=what)
    return value


def energy(power_mw: float, duration_ms: float) -> float:
    """Energy in uJ of a constant ``power_mw`` held for ``duration_ms``."""
    return _check_quantity(power_mw, "power_mw") * _check_quantity(duration_ms, "duration_ms")


@dataclass(frozen=True)
class PhaseProfile:
    name: Phase
    power_mw: float
    time_ms: float

    def __post_init__(self):
        object.__setattr__(self, "name", Phase(self.name))
        object.__setattr__(self, "power_mw", _check_quantity(self.power_mw, "power_mw"))
        object.__setattr__(self, "time_ms", _check_quantity(self.time_ms, "time_ms"))
        if self.time_ms > 0 and self.power_mw == 0:
            raise UnitError(f"phase {self.name.value} has a duration but zero power", field="power_mw")

    def energy(self) -> float:
        return energy(self.power_mw, self.time_ms)


@dataclass(frozen=True)
class ItemProfile:
    """Ordered phases of one workload item plus the accelerator's idle power.

    Phases are sorted into canonical order on construction, so a configuration
    phase, when present, always comes first.
    """

    phases: tuple
    idle_power_mw: float = 0.0

    def __post_init__(self):
        phases = tuple(self.phases)
        if not phases:
            raise SchemaError("an item needs at least one phase", field="phases")
        seen = set()
        for p in phases:
            if p.name in seen:
                raise DuplicatePhase(f"phase {p.name.value!r} appears twice", field="phases")
            seen.add(p.name)
        phases = tuple(sorted(phases, key=lambda p: PHASE_ORDER.index(p.name)))
        object.__setattr__(self, "phases", phases)
        object.__setattr__(self, "idle_power_mw", _check_quantity(self.idle_power_mw, "idle_power_mw"))

    def latency(self) -> float:
        return sum(p.time_ms for p in self.phases)

    def item_energy(self) -> float:
        return sum(p.energy() for p in self.phases)

    def phase(self, name: Phase) -> Optional[PhaseProfile]:
        for p in self.phases:
            if p.name == Phase(name):
                return p
        return None

    @property
    def has_configuration(self) -> bool:
        return self.phase(Phase.CONFIGURATION) is not None

    def configuration_energy(self) -> float:
        cfg = self.phase(Phase.CONFIGURATION)
        return cfg.energy() if cfg is not None else 0.0

    def without_configuration(self) -> "ItemProfile":
        rest = tuple(p for p in self.phases if p.name != Phase.CONFIGURATION)
        return ItemProfile(rest, self.idle_power_mw)

    def with_idle_power(self, idle_power_mw: float) -> "ItemProfile":
        return replace(self, idle_power_mw=idle_power_mw)

    def concat(self, other: "ItemProfile") -> "ItemProfile":
        return ItemProfile(self.phases + other.phases, self.idle_power_mw)


def item_energy(profile: ItemProfile) -> float:
    """Sum of per-phase energies of one item, in uJ."""
    return profile.item_energy()


def fits_period(latency_ms, request_period_ms):
    """Whether an item of the given latency fits the period.

    A relative slack of ``LATENCY_RTOL`` absorbs float drift in the summed
    phase times, so a period equal to the nominal latency is feasible.
    """
    return request_period_ms >= latency_ms * (1.0 - LATENCY_RTOL)


def idle_time(profile: ItemProfile, request_period_ms: float) -> float:
    """Time spent waiting between two items at the given request period."""
    return max(request_period_ms - profile.latency(), 0.0)


def idle_energy(profile: ItemProfile, request_period_ms: float) -> float:
    """Energy burnt while idling between two consecutive items."""
    return energy(profile.idle_power_mw, idle_time(profile, request_period_ms))


@dataclass(frozen=True)
class Sweep:
    """Evenly spaced grid of request periods, both ends inclusive."""

    start_ms: float
    stop_ms: float
    step_ms: float

    def __post_init__(self):
        for name in ("start_ms", "stop_ms", "step_ms"):
            value = _check_quantity(getattr(self, name), name)
            if value <= 0:
                raise UnitError(f"{name} must be positive", field=name)
            object.__setattr__(self, name, value)
        if self.start_ms > self.stop_ms:
            raise SchemaError("sweep start_ms exceeds stop_ms", field="stop_ms")
        steps = (self.stop_ms - self.start_ms) / self.step_ms
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise SchemaError("sweep step_ms does not divide stop_ms - start_ms", field="step_ms")

    def __len__(self):
        return int(round((self.stop_ms - self.start_ms) / self.step_ms)) + 1

    def periods(self) -> np.ndarray:
        k = np.arange(len(self), dtype=np.float64)
        # rounding removes the drift of start + k * step (e.g. 40.00000000000001)
        return np.round(self.start_ms + k * self.step_ms, 9)


@dataclass(frozen=True)
class WorkloadSpec:
    """Energy budget plus either one request period or a sweep of them."""

    budget_uj: float
    request_period_ms: Optional[float] = None
    sweep: Optional[Sweep] = None

    def __post_init__(self):
        budget = _check_quantity(self.budget_uj, "budget")
        if budget <= 0:
            raise UnitError("budget must be positive", field="budget")
        object.__setattr__(self, "budget_uj", budget)
        if (self.request_period_ms is None) == (self.sweep is None):
            raise SchemaError("give exactly one of request_period_ms or sweep", field="request_period_ms")
        if self.request_period_ms is not None:
            period = _check_quantity(self.request_period_ms, "request_period_ms")
            if period <= 0:
                raise UnitError("request_period_ms must be positive", field="request_period_ms")
            object.__setattr__(self, "request_period_ms", period)

    @property
    def budget_j(self) -> float:
        return self.budget_uj / UJ_PER_J

    def periods(self) -> np.ndarray:
        if self.sweep is not None:
            return self.sweep.periods()
        return np.array([self.request_period_ms])

    def at_period(self, request_period_ms: float) -> "WorkloadSpec":
        return WorkloadSpec(self.budget_uj, request_period_ms=request_period_ms)


@dataclass(frozen=True)
class StrategyOutcome:
    strategy: StrategyKind
    request_period_ms: float
    n_max: int
    lifetime_ms: float
    per_period_energy_uj: float
    feasible: bool
    off_time_ms: Optional[float] = None
    idle_time_ms: Optional[float] = None

    @property
    def lifetime_s(self) -> float:
        return self.lifetime_ms / MS_PER_S

    @property
    def lifetime_h(self) -> float:
        return self.lifetime_ms / MS_PER_H


def phases_from_rows(rows: Iterable[Sequence]) -> tuple:
    """Build phase profiles from ``(name, power_mw, time_ms)`` triples."""
    return tuple(PhaseProfile(Phase(name), power, time) for name, power, time in rows)
