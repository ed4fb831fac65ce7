"""FPGA configuration-phase cost model.

The configuration phase is split into two stages:

* Setup: power-up through configuration-memory clear. Fixed time and power
  for a given device, independent of the SPI settings.
* Bitstream Loading: reading the bitstream from SPI flash. Its time is
  ``bits / (buswidth * f_spi)``; compression shrinks the bit count.

Loading power is looked up in the device's measured table; settings that
were never measured fall back to a linear model over SPI throughput
(buswidth x MHz) with an additive offset for compressed bitstreams.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from .errors import InconsistentAnchors, SchemaError, UnknownParams
from .model import UJ_PER_MJ

BUSWIDTHS = (1, 2, 4)
FREQUENCIES_MHZ = (3, 6, 9, 12, 16, 22, 26, 33, 40, 50, 66)
ANCHOR_BITS_TOLERANCE = 0.05


@dataclass(frozen=True, order=True)
class ConfigParams:
    buswidth: int
    freq_mhz: int
    compressed: bool

    def __post_init__(self):
        if self.buswidth not in BUSWIDTHS:
            raise SchemaError(f"buswidth must be one of {BUSWIDTHS}, got {self.buswidth}", field="buswidth")
        if self.freq_mhz not in FREQUENCIES_MHZ:
            raise SchemaError(f"freq_mhz must be one of {FREQUENCIES_MHZ}, got {self.freq_mhz}", field="freq_mhz")
        if not isinstance(self.compressed, (bool, np.bool_)):
            raise SchemaError("compressed must be a boolean", field="compressed")
        object.__setattr__(self, "compressed", bool(self.compressed))

    @property
    def throughput_mbps(self) -> int:
        """Raw SPI throughput in Mbit/s."""
        return self.buswidth * self.freq_mhz


def full_grid() -> List[ConfigParams]:
    """All 66 combinations of buswidth, frequency and compression."""
    return [ConfigParams(b, f, c)
            for c, b, f in itertools.product((False, True), BUSWIDTHS, FREQUENCIES_MHZ)]


@dataclass(frozen=True)
class LoadPowerModel:
    """Loading-stage power as ``base + slope * throughput (+ offset if compressed)``."""

    base_mw: float
    slope_mw_per_mbps: float
    compressed_offset_mw: float = 0.0

    def power(self, params: ConfigParams) -> float:
        p = self.base_mw + self.slope_mw_per_mbps * params.throughput_mbps
        if params.compressed:
            p += self.compressed_offset_mw
        return p

    def scaled(self, factor: float) -> "LoadPowerModel":
        return LoadPowerModel(self.base_mw * factor, self.slope_mw_per_mbps * factor,
                              self.compressed_offset_mw * factor)


@dataclass(frozen=True)
class DeviceProfile:
    name: str
    setup_time_ms: float
    setup_power_mw: float
    bitstream_bits: float
    compression_ratio: float
    load_power_table: Dict[ConfigParams, float] = field(default_factory=dict)
    load_power_model: Optional[LoadPowerModel] = None

    def __post_init__(self):
        if self.setup_time_ms <= 0:
            raise SchemaError("setup_time_ms must be positive", field="setup_time_ms")
        if self.setup_power_mw < 0:
            raise SchemaError("setup_power_mw must be non-negative", field="setup_power_mw")
        if self.bitstream_bits < 0:
            raise SchemaError("bitstream_bits must be non-negative", field="bitstream_bits")
        if not 0 < self.compression_ratio <= 1:
            raise SchemaError("compression_ratio must lie in (0, 1]", field="compression_ratio")
        if any(p <= 0 for p in self.load_power_table.values()):
            raise SchemaError("load power entries must be positive", field="load_power_table")

    @property
    def setup_energy_uj(self) -> float:
        return self.setup_time_ms * self.setup_power_mw

    def effective_bits(self, params: ConfigParams) -> float:
        return self.bitstream_bits * (self.compression_ratio if params.compressed else 1.0)

    def load_power(self, params: ConfigParams, interpolate: bool = True) -> float:
        if params in self.load_power_table:
            return self.load_power_table[params]
        if interpolate and self.load_power_model is not None:
            return self.load_power_model.power(params)
        raise UnknownParams(f"{self.name}: no loading power for {params}")

    def with_load_power_table(self, table: Dict[ConfigParams, float]) -> "DeviceProfile":
        """Copy whose measured table is extended (and overridden) by ``table``."""
        return replace(self, load_power_table={**self.load_power_table, **table})


@dataclass(frozen=True)
class StageEstimate:
    time_ms: float
    power_mw: float
    energy_uj: float


@dataclass(frozen=True)
class ConfigEstimate:
    params: ConfigParams
    setup: StageEstimate
    loading: StageEstimate

    @property
    def total_time_ms(self) -> float:
        return self.setup.time_ms + self.loading.time_ms

    @property
    def total_energy_uj(self) -> float:
        return self.setup.energy_uj + self.loading.energy_uj

    @property
    def total_energy_mj(self) -> float:
        return self.total_energy_uj / UJ_PER_MJ

    @property
    def average_power_mw(self) -> float:
        return self.total_energy_uj / self.total_time_ms


def loading_time_ms(bits: float, params: ConfigParams) -> float:
    # bits / (lanes * MHz) gives microseconds
    return bits / (params.throughput_mbps * 1e3)


def estimate(device: DeviceProfile, params: ConfigParams, interpolate: bool = True) -> ConfigEstimate:
    setup = StageEstimate(device.setup_time_ms, device.setup_power_mw, device.setup_energy_uj)
    bits = device.effective_bits(params)
    if bits == 0:
        loading = StageEstimate(0.0, 0.0, 0.0)
    else:
        t = loading_time_ms(bits, params)
        p = device.load_power(params, interpolate)
        loading = StageEstimate(t, p, p * t)
    return ConfigEstimate(params, setup, loading)


@dataclass(frozen=True)
class Anchor:
    """One measured configuration: total phase time and energy at a setting."""

    params: ConfigParams
    time_ms: float
    energy_uj: float


def _fit_power_model(points, reference: Optional[DeviceProfile]) -> LoadPowerModel:
    tp = np.array([p.throughput_mbps for p, _ in points], dtype=float)
    comp = np.array([p.compressed for p, _ in points], dtype=float)
    power = np.array([w for _, w in points], dtype=float)

    full = np.column_stack([np.ones_like(tp), tp, comp])
    if np.linalg.matrix_rank(full) == 3:
        base, slope, offset = np.linalg.lstsq(full, power, rcond=None)[0]
        return LoadPowerModel(float(base), float(slope), float(offset))
    line = full[:, :2]
    if np.linalg.matrix_rank(line) == 2:
        # the compression offset cannot be separated from throughput; fold it into the line
        base, slope = np.linalg.lstsq(line, power, rcond=None)[0]
        return LoadPowerModel(float(base), float(slope), 0.0)
    if reference is not None and reference.load_power_model is not None:
        predicted = [reference.load_power_model.power(p) for p, _ in points]
        return reference.load_power_model.scaled(float(power.mean() / np.mean(predicted)))
    return LoadPowerModel(float(power.mean()), 0.0, 0.0)


def calibrate(anchors: Sequence[Anchor], setup_time_ms: float, setup_power_mw: float,
              name: str = "device", reference: Optional[DeviceProfile] = None) -> DeviceProfile:
    """Build a device profile from measured anchor settings.

    Each anchor yields a bit count ``(time - setup_time) * buswidth * f`` and a
    loading power ``(energy - setup_energy) / (time - setup_time)``. Anchors of
    the same compression setting must agree on the bit count within 5%.
    ``reference`` fills in what the anchors cannot determine (compression
    ratio, shape of the power model), e.g. a sibling device of the same family.
    """
    if not anchors:
        raise InconsistentAnchors("calibration needs at least one anchor")
    setup_energy = setup_time_ms * setup_power_mw
    bits = {False: [], True: []}
    points = []
    for a in anchors:
        window = a.time_ms - setup_time_ms
        if window <= 0:
            raise InconsistentAnchors(f"anchor {a.params} is not longer than the setup stage")
        load_energy = a.energy_uj - setup_energy
        if load_energy <= 0:
            raise InconsistentAnchors(f"anchor {a.params} uses less energy than the setup stage")
        bits[a.params.compressed].append(window * a.params.throughput_mbps * 1e3)
        points.append((a.params, load_energy / window))

    for compressed, values in bits.items():
        if values and max(values) > min(values) * (1 + ANCHOR_BITS_TOLERANCE):
            kind = "compressed" if compressed else "uncompressed"
            raise InconsistentAnchors(f"{kind} anchors imply bit counts {min(values):.0f}..{max(values):.0f}")

    plain = float(np.mean(bits[False])) if bits[False] else None
    packed = float(np.mean(bits[True])) if bits[True] else None
    if plain is not None and packed is not None:
        ratio = packed / plain
    elif reference is not None:
        ratio = reference.compression_ratio
    else:
        warnings.warn("anchors cover one compression setting only; assuming no compression gain")
        ratio = 1.0
    if plain is None:
        plain = packed / ratio

    table = {}
    for params, power in points:
        table.setdefault(params, []).append(power)
    table = {p: float(np.mean(v)) for p, v in table.items()}

    return DeviceProfile(
        name=name,
        setup_time_ms=setup_time_ms,
        setup_power_mw=setup_power_mw,
        bitstream_bits=plain,
        compression_ratio=ratio,
        load_power_table=table,
        load_power_model=_fit_power_model(points, reference),
    )


@dataclass(frozen=True)
class OptimizeResult:
    best: ConfigParams
    estimate: ConfigEstimate
    table: List[ConfigEstimate]


def optimize(device: DeviceProfile, grid: Optional[Iterable[ConfigParams]] = None,
             interpolate: bool = True) -> OptimizeResult:
    """Energy-optimal setting; ties go to the shorter phase, then to lower loading power."""
    grid = full_grid() if grid is None else list(grid)
    if not grid:
        raise ValueError("empty parameter grid")
    table = [estimate(device, p, interpolate) for p in grid]
    best = min(table, key=lambda e: (e.total_energy_uj, e.total_time_ms, e.loading.power_mw))
    return OptimizeResult(best.params, best, table)
