"""Energy model for duty-cycled FPGA inference on a fixed energy budget.

Compares the On-Off strategy (power off between requests, reconfigure every
time) with Idle-Waiting (configure once, idle in between), and estimates the
configuration-phase cost for SPI flash settings.

Units are carried as plain floats with the unit in the name: powers in mW,
times in ms, energies in uJ (mW * ms).
"""

from .analytic import (
    AnalyticInput,
    CrossPoint,
    GridResult,
    cross_point,
    e_sum_idle_waiting,
    e_sum_on_off,
    evaluate_grid,
    lifetime,
    n_max,
    outcome,
    sweep,
    validate_feasibility,
)
from .config import (
    Anchor,
    ConfigEstimate,
    ConfigParams,
    DeviceProfile,
    LoadPowerModel,
    calibrate,
    estimate,
    full_grid,
    optimize,
)
from .errors import (
    DuplicatePhase,
    DutyCycleError,
    InconsistentAnchors,
    InfeasiblePeriod,
    OutOfRange,
    SchemaError,
    UnitError,
    UnknownParams,
)
from .files import (
    calibrate_file,
    load_device,
    load_item,
    load_workload,
    parse_anchors,
    parse_device,
    parse_item,
    parse_workload,
)
from .model import (
    ItemProfile,
    Phase,
    PhaseProfile,
    StrategyKind,
    StrategyOutcome,
    Sweep,
    WorkloadSpec,
    idle_energy,
    idle_time,
    item_energy,
)
from .report import emit_report
from .trace import EventKind, TraceDetail, TraceEvent, TraceResult, energy_at, run_trace

__version__ = "0.1.0"
