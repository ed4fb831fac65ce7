"""Reading and writing the YAML description files.

Four file kinds share one convention: a mandatory ``schema: 1`` key, units
spelled out in every numeric key, and unknown keys rejected.

workload.yaml::

    schema: 1
    budget_j: 4147
    request_period_ms: 40          # or
    sweep: {start_ms: 10, stop_ms: 120, step_ms: 0.01}

item.yaml::

    schema: 1
    idle_power_mw: 134.3
    init_energy_mj: 11.85          # optional, defaults to the configuration phase
    phases:
      - {name: configuration, power_mw: 327.9, time_ms: 36.145}
      - ...

device.yaml and anchors.yaml are described in ``docs/formats.md``.
"""

from __future__ import annotations

import math
import warnings
from decimal import Decimal, InvalidOperation, localcontext
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Union

import yaml

from .analytic import AnalyticInput
from .config import Anchor, ConfigParams, DeviceProfile, LoadPowerModel, calibrate
from .errors import SchemaError, UnitError
from .model import (
    UJ_PER_J,
    UJ_PER_MJ,
    ItemProfile,
    Phase,
    PhaseProfile,
    Sweep,
    WorkloadSpec,
)

SCHEMA_VERSION = 1
_UJ_PER_J = int(UJ_PER_J)
_UJ_PER_MJ = int(UJ_PER_MJ)

_PHASE_ALIASES = {p.value.replace("_", ""): p for p in Phase}

Text = Union[str, bytes]


class _Doc:
    """Parsed YAML plus the source line of every key, for diagnostics."""

    def __init__(self, text: Text):
        if isinstance(text, bytes):
            try:
                text = text.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise SchemaError(f"input is not UTF-8: {exc}") from None
        try:
            node = yaml.compose(text, Loader=yaml.SafeLoader)
            self.data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            raise SchemaError(f"invalid YAML: {getattr(exc, 'problem', exc)}",
                              line=mark.line + 1 if mark else None) from None
        self.lines: Dict[str, int] = {}
        self.raw: Dict[str, str] = {}
        if node is not None:
            self._index(node, "")
        if not isinstance(self.data, dict):
            raise SchemaError("top level must be a mapping", line=1)

    def _index(self, node, path):
        self.lines[path] = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            for key, value in node.value:
                sub = f"{path}.{key.value}" if path else str(key.value)
                self.lines[sub] = key.start_mark.line + 1
                self._index(value, sub)
        elif isinstance(node, yaml.SequenceNode):
            for i, value in enumerate(node.value):
                self._index(value, f"{path}[{i}]")
        else:
            self.raw[path] = node.value

    def error(self, cls, message, path, at=None):
        """Error for field ``path``, located at ``at`` (default: the field itself)."""
        return cls(message, field=path, line=self.lines.get(path if at is None else at))

    def mapping(self, value, path, required, optional=()):
        if not isinstance(value, dict):
            raise self.error(SchemaError, "expected a mapping", path)
        prefix = f"{path}." if path else ""
        unknown = sorted(set(map(str, value)) - set(required) - set(optional))
        if unknown:
            raise self.error(SchemaError, f"unknown key {unknown[0]!r}", prefix + unknown[0])
        for key in required:
            if key not in value:
                raise self.error(SchemaError, f"missing key {key!r}", prefix + key, at=path)
        return value

    def number(self, value, path, positive=False, scale=1):
        """Numeric field, read from its source text so that ``scale`` rounds only once."""
        if isinstance(value, bool) or not isinstance(value, (int, float, str)):
            raise self.error(SchemaError, f"expected a number, got {value!r}", path)
        try:
            exact = Decimal(self.raw.get(path, str(value)).strip().replace("_", ""))
        except InvalidOperation:
            raise self.error(SchemaError, f"expected a number, got {value!r}", path) from None
        if exact.is_nan():
            raise self.error(UnitError, "value must be finite", path)
        with localcontext() as ctx:
            ctx.prec = 60
            value = float(exact * scale)
        if not math.isfinite(value):
            raise self.error(UnitError, "value must be finite", path)
        if value < 0 or (positive and value == 0):
            raise self.error(UnitError, f"value must be {'positive' if positive else 'non-negative'}, got {value}",
                             path)
        return value

    def boolean(self, value, path):
        if not isinstance(value, bool):
            raise self.error(SchemaError, "expected true or false", path)
        return value

    def integer(self, value, path):
        if isinstance(value, bool) or not isinstance(value, int):
            raise self.error(SchemaError, "expected an integer", path)
        return value

    def check_schema(self):
        if self.data.get("schema") != SCHEMA_VERSION:
            raise self.error(SchemaError, f"expected 'schema: {SCHEMA_VERSION}'", "schema")


def _scaled_down(value: float, scale: int):
    """``value / scale`` as a YAML scalar that parses back to exactly ``value``."""
    plain = value / scale
    if float(Decimal(repr(plain)) * scale) == value:
        return plain
    with localcontext() as ctx:
        ctx.prec = 1100
        return str((Decimal(value) / scale).normalize())


def _rewrap(doc, exc, path):
    """Attach file location to an error raised by a domain constructor."""
    field = getattr(exc, "field", None)
    full = f"{path}.{field}" if field and path else (field or path)
    return type(exc)(exc.detail, field=full, line=doc.lines.get(full, doc.lines.get(path)))


# workload ------------------------------------------------------------------

def parse_workload(text: Text) -> WorkloadSpec:
    doc = _Doc(text)
    data = doc.mapping(doc.data, "", ["schema", "budget_j"], ["request_period_ms", "sweep"])
    doc.check_schema()
    budget = doc.number(data["budget_j"], "budget_j", positive=True, scale=_UJ_PER_J)
    if ("request_period_ms" in data) == ("sweep" in data):
        raise doc.error(SchemaError, "give exactly one of request_period_ms or sweep", "request_period_ms",
                        at="sweep" if "sweep" in data else "")
    if "sweep" in data:
        sw = doc.mapping(data["sweep"], "sweep", ["start_ms", "stop_ms", "step_ms"])
        values = {k: doc.number(sw[k], f"sweep.{k}", positive=True) for k in ("start_ms", "stop_ms", "step_ms")}
        try:
            return WorkloadSpec(budget, sweep=Sweep(**values))
        except SchemaError as exc:
            raise _rewrap(doc, exc, "sweep") from None
    period = doc.number(data["request_period_ms"], "request_period_ms", positive=True)
    return WorkloadSpec(budget, request_period_ms=period)


def dump_workload(spec: WorkloadSpec) -> str:
    data = {"schema": SCHEMA_VERSION, "budget_j": _scaled_down(spec.budget_uj, _UJ_PER_J)}
    if spec.sweep is not None:
        data["sweep"] = {"start_ms": spec.sweep.start_ms, "stop_ms": spec.sweep.stop_ms,
                         "step_ms": spec.sweep.step_ms}
    else:
        data["request_period_ms"] = spec.request_period_ms
    return yaml.safe_dump(data, sort_keys=False)


# workload item -------------------------------------------------------------

@dataclass(frozen=True)
class ParsedItem:
    """An item file: the On-Off profile, its configuration-free twin and E_init."""

    on_off: ItemProfile
    idle_wait: ItemProfile
    init_energy_uj: float

    def analytic_input(self, spec: WorkloadSpec, idle_power_mw: Optional[float] = None) -> AnalyticInput:
        inp = AnalyticInput(spec, self.on_off, self.idle_wait, self.init_energy_uj)
        return inp.with_idle_power(idle_power_mw) if idle_power_mw is not None else inp


def _phase_name(doc, value, path):
    key = str(value).lower().replace("_", "").replace(" ", "").replace("-", "")
    if key not in _PHASE_ALIASES:
        names = ", ".join(p.value for p in Phase)
        raise doc.error(SchemaError, f"unknown phase {value!r} (expected one of {names})", path)
    return _PHASE_ALIASES[key]


def parse_item(text: Text) -> ParsedItem:
    doc = _Doc(text)
    data = doc.mapping(doc.data, "", ["schema", "phases", "idle_power_mw"], ["init_energy_mj"])
    doc.check_schema()
    if not isinstance(data["phases"], list) or not data["phases"]:
        raise doc.error(SchemaError, "phases must be a non-empty list", "phases")
    phases = []
    for i, raw in enumerate(data["phases"]):
        path = f"phases[{i}]"
        entry = doc.mapping(raw, path, ["name", "power_mw", "time_ms"])
        name = _phase_name(doc, entry["name"], f"{path}.name")
        power = doc.number(entry["power_mw"], f"{path}.power_mw")
        time = doc.number(entry["time_ms"], f"{path}.time_ms")
        try:
            phases.append(PhaseProfile(name, power, time))
        except SchemaError as exc:
            raise _rewrap(doc, exc, path) from None
    idle = doc.number(data["idle_power_mw"], "idle_power_mw")
    try:
        on_off = ItemProfile(tuple(phases), idle)
    except SchemaError as exc:
        raise _rewrap(doc, exc, "") from None

    if "init_energy_mj" in data:
        init = doc.number(data["init_energy_mj"], "init_energy_mj", scale=_UJ_PER_MJ)
    elif on_off.has_configuration:
        init = on_off.configuration_energy()
    else:
        warnings.warn("item has no configuration phase; initial overhead E_init defaults to 0")
        init = 0.0
    idle_wait = on_off.without_configuration() if on_off.has_configuration else on_off
    return ParsedItem(on_off, idle_wait, init)


def dump_item(item: ParsedItem) -> str:
    data = {
        "schema": SCHEMA_VERSION,
        "idle_power_mw": item.on_off.idle_power_mw,
        "phases": [{"name": p.name.value, "power_mw": p.power_mw, "time_ms": p.time_ms}
                   for p in item.on_off.phases],
    }
    if item.init_energy_uj != item.on_off.configuration_energy():
        data["init_energy_mj"] = _scaled_down(item.init_energy_uj, _UJ_PER_MJ)
    return yaml.safe_dump(data, sort_keys=False)


# device profiles and calibration anchors ------------------------------------

def _params(doc, entry, path):
    bw = doc.integer(entry["buswidth"], f"{path}.buswidth")
    freq = doc.integer(entry["freq_mhz"], f"{path}.freq_mhz")
    comp = doc.boolean(entry["compressed"], f"{path}.compressed")
    try:
        return ConfigParams(bw, freq, comp)
    except SchemaError as exc:
        raise _rewrap(doc, exc, path) from None


def parse_device(text: Text) -> DeviceProfile:
    doc = _Doc(text)
    keys = ["schema", "name", "setup_time_ms", "setup_power_mw", "bitstream_bits", "compression_ratio"]
    data = doc.mapping(doc.data, "", keys, ["load_power_model", "load_power_table"])
    doc.check_schema()
    model = None
    if "load_power_model" in data:
        m = doc.mapping(data["load_power_model"], "load_power_model",
                        ["base_mw", "slope_mw_per_mbps"], ["compressed_offset_mw"])
        # the fitted slope and offset may legitimately be negative
        model = LoadPowerModel(float(m["base_mw"]), float(m["slope_mw_per_mbps"]),
                               float(m.get("compressed_offset_mw", 0.0)))
    table = {}
    for i, raw in enumerate(data.get("load_power_table") or []):
        path = f"load_power_table[{i}]"
        entry = doc.mapping(raw, path, ["buswidth", "freq_mhz", "compressed", "load_mw"])
        table[_params(doc, entry, path)] = doc.number(entry["load_mw"], f"{path}.load_mw", positive=True)
    try:
        return DeviceProfile(
            name=str(data["name"]),
            setup_time_ms=doc.number(data["setup_time_ms"], "setup_time_ms", positive=True),
            setup_power_mw=doc.number(data["setup_power_mw"], "setup_power_mw"),
            bitstream_bits=doc.number(data["bitstream_bits"], "bitstream_bits"),
            compression_ratio=doc.number(data["compression_ratio"], "compression_ratio", positive=True),
            load_power_table=table,
            load_power_model=model,
        )
    except SchemaError as exc:
        raise _rewrap(doc, exc, "") from None


def dump_device(device: DeviceProfile) -> str:
    data = {
        "schema": SCHEMA_VERSION,
        "name": device.name,
        "setup_time_ms": float(device.setup_time_ms),
        "setup_power_mw": float(device.setup_power_mw),
        "bitstream_bits": float(device.bitstream_bits),
        "compression_ratio": float(device.compression_ratio),
    }
    if device.load_power_model is not None:
        m = device.load_power_model
        data["load_power_model"] = {"base_mw": m.base_mw, "slope_mw_per_mbps": m.slope_mw_per_mbps,
                                    "compressed_offset_mw": m.compressed_offset_mw}
    data["load_power_table"] = [
        {"buswidth": p.buswidth, "freq_mhz": p.freq_mhz, "compressed": p.compressed, "load_mw": w}
        for p, w in sorted(device.load_power_table.items())
    ]
    return yaml.safe_dump(data, sort_keys=False)


@dataclass(frozen=True)
class AnchorSet:
    name: str
    setup_time_ms: float
    setup_power_mw: float
    anchors: tuple
    reference: Optional[str] = None

    def calibrate(self, reference: Optional[DeviceProfile] = None) -> DeviceProfile:
        return calibrate(self.anchors, self.setup_time_ms, self.setup_power_mw, self.name, reference)


def parse_anchors(text: Text) -> AnchorSet:
    doc = _Doc(text)
    data = doc.mapping(doc.data, "", ["schema", "name", "setup_time_ms", "setup_power_mw", "anchors"],
                       ["reference"])
    doc.check_schema()
    if not isinstance(data["anchors"], list) or not data["anchors"]:
        raise doc.error(SchemaError, "anchors must be a non-empty list", "anchors")
    anchors = []
    for i, raw in enumerate(data["anchors"]):
        path = f"anchors[{i}]"
        entry = doc.mapping(raw, path, ["buswidth", "freq_mhz", "compressed", "time_ms", "energy_mj"])
        anchors.append(Anchor(
            _params(doc, entry, path),
            doc.number(entry["time_ms"], f"{path}.time_ms", positive=True),
            doc.number(entry["energy_mj"], f"{path}.energy_mj", positive=True, scale=_UJ_PER_MJ),
        ))
    return AnchorSet(
        name=str(data["name"]),
        setup_time_ms=doc.number(data["setup_time_ms"], "setup_time_ms", positive=True),
        setup_power_mw=doc.number(data["setup_power_mw"], "setup_power_mw"),
        anchors=tuple(anchors),
        reference=data.get("reference"),
    )


def calibrate_file(path: Union[str, Path]) -> DeviceProfile:
    """Calibrate from an anchors file, resolving its ``reference`` relative to it."""
    path = Path(path)
    anchor_set = parse_anchors(path.read_bytes())
    reference = None
    if anchor_set.reference:
        ref_path = path.parent / anchor_set.reference
        if ref_path.name.endswith("anchors.yaml"):
            reference = calibrate_file(ref_path)
        else:
            reference = parse_device(ref_path.read_bytes())
    return anchor_set.calibrate(reference)


def load_workload(path) -> WorkloadSpec:
    return parse_workload(Path(path).read_bytes())


def load_item(path) -> ParsedItem:
    return parse_item(Path(path).read_bytes())


def load_device(path) -> DeviceProfile:
    return parse_device(Path(path).read_bytes())
