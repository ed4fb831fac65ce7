"""
On-Off versus Idle-Waiting on one battery
=========================================

Build the LSTM accelerator's workload item by hand, then count how many
items each strategy gets out of a 4147 J budget.
"""

import numpy as np

from fpga_duty import AnalyticInput, ItemProfile, StrategyKind, WorkloadSpec, cross_point, n_max
from fpga_duty.model import MS_PER_H, phases_from_rows

# one workload item: (phase, power in mW, time in ms)
item = ItemProfile(phases_from_rows([
    ("configuration", 327.9, 36.145),
    ("data_loading", 138.7, 0.0100),
    ("inference", 171.4, 0.0281),
    ("data_offloading", 144.1, 0.0020),
]), idle_power_mw=134.3)

print("latency           %.4f ms" % item.latency())
print("item energy       %.5f uJ" % item.item_energy())
print("without config    %.5f uJ" % item.without_configuration().item_energy())

# budgets are kept in uJ internally: 4147 J = 4.147e9 uJ
spec = WorkloadSpec(4147e6, request_period_ms=40.0)
inp = AnalyticInput.from_item(spec, item)

for strategy in StrategyKind:
    n = n_max(strategy, inp, 40.0)
    print("%-13s %9d items, %.2f h" % (strategy.value, n, n * 40.0 / MS_PER_H))

# On-Off does not care about the period once the item fits
periods = np.array([40.0, 60.0, 100.0])
print("on-off n_max     ", [n_max(StrategyKind.ON_OFF, inp, t) for t in periods])
print("idle-waiting     ", [n_max(StrategyKind.IDLE_WAITING, inp, t) for t in periods])

# below the cross point, staying configured wins
cp = cross_point(inp)
print("cross point       %.3f ms (bisection %.3f ms)" % (cp.request_period_ms, cp.bisection_ms))
