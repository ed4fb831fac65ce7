"""
Sweeping the request period under three idle-power levels
=========================================================

Closed-form sweep over 10 to 120 ms in 0.01 ms steps, repeated for the
baseline idle power and two lower ones, with a report written to ./out.
"""

import numpy as np

from fpga_duty import StrategyKind, cross_point, emit_report, evaluate_grid
from fpga_duty.files import load_item, load_workload
from fpga_duty.model import MS_PER_H
from fpga_duty.reproduce import preset_path

item = load_item(preset_path("lstm_item.yaml"))
spec = load_workload(preset_path("exp2_workload.yaml"))
inp = item.analytic_input(spec)
periods = spec.periods()
print(len(periods), "request periods from", periods[0], "to", periods[-1], "ms")

levels = {"baseline": 134.3, "method1": 34.2, "method1_2": 24.0}
grids = {name: evaluate_grid(StrategyKind.IDLE_WAITING, inp.with_idle_power(p), periods)
         for name, p in levels.items()}

for name, grid in grids.items():
    ratio = np.mean(grid.n_max / grids["baseline"].n_max)
    print("%-10s mean lifetime %6.2f h, %.3fx the baseline item count"
          % (name, grid.lifetime_ms.mean() / MS_PER_H, ratio))

# a lower idle power pushes the cross point out
for name, p in levels.items():
    print("%-10s cross point %.2f ms" % (name, cross_point(inp.with_idle_power(p)).request_period_ms))

on_off = evaluate_grid(StrategyKind.ON_OFF, inp, periods)
series = {"on-off": on_off.outcomes()}
series.update({"idle-waiting@%gmW" % levels[k]: g.outcomes() for k, g in grids.items()})
bundle = emit_report(series, reference="idle-waiting@134.3mW")
for path in bundle.write("out/walkthrough_sweep"):
    print("wrote", path)
