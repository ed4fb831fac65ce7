"""
Checking the closed form against an item-by-item trace
======================================================

The trace simulator walks the timeline one phase at a time with an exact
energy ledger. Its item counts must equal the closed form everywhere.
"""

import random

from fpga_duty import StrategyKind, TraceDetail, energy_at, n_max, run_trace
from fpga_duty.files import load_item, load_workload
from fpga_duty.reproduce import preset_path

inp = load_item(preset_path("lstm_item.yaml")).analytic_input(load_workload(preset_path("workload_40ms.yaml")))

# a full trace keeps the first 10,000 events and counts the rest
trace = run_trace(StrategyKind.IDLE_WAITING, inp, 10.0)
print("items", trace.items_completed, "events kept", len(trace.events), "elided", trace.elided)
for e in trace.events[:6]:
    print("  %10.4f ms  %-10s %-16s %12.4f uJ" % (e.timestamp_ms, e.kind.value,
                                                 e.phase.value if e.phase else "", e.cumulative_uj))

# cumulative energy at any time is linear within a segment
print("energy at 10.0401 ms: %.5f uJ" % energy_at(trace, 10.0401))

rng = random.Random(1)
for _ in range(5):
    t = rng.uniform(37.0, 120.0)
    small = inp.with_budget(rng.uniform(1e5, 1e7))
    for strategy in StrategyKind:
        traced = run_trace(strategy, small, t, TraceDetail.COUNTS_ONLY).items_completed
        assert traced == n_max(strategy, small, t)
    print("T = %6.2f ms: trace and closed form agree" % t)
