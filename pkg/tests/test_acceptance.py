"""Acceptance criteria, one test each, with tolerances pinned below.

Every test prints a single ``[PASS]``/``[FAIL]`` line (visible with or
without ``-s``). Run just this file with::

    pytest tests/test_acceptance.py -v
"""

import random
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracle
from strategies import inputs
from fpga_duty import (
    StrategyKind,
    TraceDetail,
    WorkloadSpec,
    cross_point,
    emit_report,
    evaluate_grid,
    lifetime,
    n_max,
    optimize,
    outcome,
    run_trace,
    sweep,
)
from fpga_duty.config import ConfigParams, estimate
from fpga_duty.files import calibrate_file, dump_item, dump_workload, parse_item, parse_workload
from fpga_duty.model import MS_PER_H
from fpga_duty.reproduce import preset_path, saved_power_pct

ON_OFF, IDLE = StrategyKind.ON_OFF, StrategyKind.IDLE_WAITING

# idle power levels in mW: baseline, low-power idle, low-power idle plus clock gating
IDLE_MW = {"baseline": 134.3, "method1": 34.2, "method1_2": 24.0}

# pinned tolerances (relative unless stated)
TOL_C1 = 0.02
TOL_C2 = 0.001
TOL_C3 = 0.02
TOL_C4 = 0.02
TOL_C5 = 0.03
TOL_C6 = 0.02
TOL_C7_RATIO = 0.02
DECIMALS_C7_SAVED = 2
TOL_C8_RATIO = 0.005
TOL_C8_ANCHOR = 0.001
CASES_C9 = 1000
MAX_ITEMS_C9 = 10_000
LIMIT_C11_S = 5.0


@pytest.fixture
def verdict(capsys):
    def record(label, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        assert ok, f"{label}: {detail}"
    return record


def within(measured, expected, rel):
    return abs(measured - expected) <= rel * abs(expected)


def test_c01_on_off_count(sweep_input, verdict):
    grid = evaluate_grid(ON_OFF, sweep_input, sweep_input.spec.periods())
    counts = np.unique(grid.n_max[grid.feasible])
    ok = len(counts) == 1 and within(counts[0], 346_073, TOL_C1)
    verdict("C1 On-Off n_max", ok,
            f"{counts.tolist()} over {int(grid.feasible.sum())} feasible periods vs 346073 +/-{TOL_C1:.0%}")


def test_c02_idle_waiting_counts(sweep_input, verdict):
    n10 = n_max(IDLE, sweep_input, 10.0)
    n120 = n_max(IDLE, sweep_input, 120.0)
    ok = within(n10, 3_085_319, TOL_C2) and within(n120, 257_305, TOL_C2)
    verdict("C2 Idle-Waiting n_max", ok,
            f"10 ms: {n10} vs 3085319, 120 ms: {n120} vs 257305 (+/-{TOL_C2:.1%})")


def test_c03_ratio_at_40ms(sweep_input, verdict):
    ratio = n_max(IDLE, sweep_input, 40.0) / n_max(ON_OFF, sweep_input, 40.0)
    verdict("C3 item ratio at 40 ms", within(ratio, 2.23, TOL_C3), f"{ratio:.4f} vs 2.23 +/-{TOL_C3:.0%}")


def test_c04_cross_points(sweep_input, verdict):
    base = cross_point(sweep_input).request_period_ms
    low = cross_point(sweep_input.with_idle_power(IDLE_MW["method1_2"])).request_period_ms
    ok = within(base, 89.21, TOL_C4) and within(low, 499.06, TOL_C4)
    verdict("C4 cross points", ok, f"{base:.3f} ms vs 89.21, {low:.3f} ms vs 499.06 (+/-{TOL_C4:.0%})")


def test_c05_mean_lifetimes(sweep_input, verdict):
    expected = {"baseline": 8.58, "method1": 33.64, "method1_2": 47.80}
    periods = sweep_input.spec.periods()
    got = {}
    for name, p in IDLE_MW.items():
        grid = evaluate_grid(IDLE, sweep_input.with_idle_power(p), periods)
        got[name] = float(grid.lifetime_ms.mean() / MS_PER_H)
    ok = all(within(got[k], expected[k], TOL_C5) for k in expected)
    verdict("C5 mean Idle-Waiting lifetime", ok,
            ", ".join(f"{k} {got[k]:.3f} h vs {expected[k]}" for k in expected) + f" (+/-{TOL_C5:.0%})")


def test_c06_lifetime_ratio_low_idle(sweep_input, verdict):
    inp = sweep_input.with_idle_power(IDLE_MW["method1_2"])
    ratio = (lifetime(n_max(IDLE, inp, 40.0), 40.0) / lifetime(n_max(ON_OFF, inp, 40.0), 40.0))
    verdict("C6 lifetime ratio at 40 ms, 24 mW", within(ratio, 12.39, TOL_C6),
            f"{ratio:.4f} vs 12.39 +/-{TOL_C6:.0%}")


def test_c07a_item_ratios_vs_baseline(sweep_input, verdict):
    periods = sweep_input.spec.periods()
    grids = {k: evaluate_grid(IDLE, sweep_input.with_idle_power(p), periods).n_max for k, p in IDLE_MW.items()}
    r1 = float(np.mean(grids["method1"] / grids["baseline"]))
    r12 = float(np.mean(grids["method1_2"] / grids["baseline"]))
    ok = within(r1, 3.92, TOL_C7_RATIO) and within(r12, 5.57, TOL_C7_RATIO)
    verdict("C7a item ratios vs baseline", ok, f"{r1:.4f} vs 3.92, {r12:.4f} vs 5.57 (+/-{TOL_C7_RATIO:.0%})")


def test_c07b_saved_idle_power(verdict):
    s1 = saved_power_pct(IDLE_MW["baseline"], IDLE_MW["method1"])
    s12 = saved_power_pct(IDLE_MW["baseline"], IDLE_MW["method1_2"])
    ok = round(s1, DECIMALS_C7_SAVED) == 74.38 and round(s12, DECIMALS_C7_SAVED) == 81.98
    verdict("C7b saved idle power", ok,
            f"{s1:.4f}% vs 74.38%, {s12:.4f}% vs 81.98% (exact to {DECIMALS_C7_SAVED} decimals)")


def test_c08_config_model(verdict):
    device = calibrate_file(preset_path("xc7s15_anchors.yaml"))
    result = optimize(device)
    best = result.estimate
    worst = estimate(device, ConfigParams(1, 3, False))
    e_ratio = worst.total_energy_uj / best.total_energy_uj
    t_ratio = worst.total_time_ms / best.total_time_ms
    ok = (within(e_ratio, 40.13, TOL_C8_RATIO) and within(t_ratio, 41.4, TOL_C8_RATIO)
          and within(best.total_time_ms, 36.15, TOL_C8_ANCHOR)
          and within(best.total_energy_mj, 11.85, TOL_C8_ANCHOR)
          and result.best == ConfigParams(4, 66, True))
    verdict("C8 XC7S15 configuration model", ok,
            f"energy ratio {e_ratio:.3f}, time ratio {t_ratio:.3f}, best {best.total_time_ms:.3f} ms / "
            f"{best.total_energy_mj:.3f} mJ at {result.best}")


def test_c09_oracle_equivalence(verdict):
    from test_trace import random_case
    rng = random.Random(9)
    mismatches, largest = [], 0
    for case in range(CASES_C9):
        inp = random_case(rng)
        t = inp.spec.request_period_ms
        for strategy in StrategyKind:
            traced = run_trace(strategy, inp, t, TraceDetail.COUNTS_ONLY).items_completed
            closed = n_max(strategy, inp, t)
            if strategy is ON_OFF:
                largest = max(largest, closed)
            if traced != closed:
                mismatches.append((case, strategy.value, traced, closed))
    ok = not mismatches and largest <= MAX_ITEMS_C9
    verdict("C9 trace vs closed form", ok,
            f"{CASES_C9} seeded cases x 2 strategies, {len(mismatches)} mismatches, max On-Off count {largest}")


@settings(max_examples=150, deadline=None)
@given(inputs(max_items=500), st.floats(min_value=0.0, max_value=300.0), st.floats(min_value=0.0, max_value=50.0))
def _properties(inp, dt, dp):
    t = inp.spec.request_period_ms
    budget = inp.spec.budget_uj
    for strategy in StrategyKind:
        n = n_max(strategy, inp, t)
        # tightness
        assert oracle.exact_e_sum(strategy.value, inp, t, n + 1) > budget
        assert n == 0 or oracle.exact_e_sum(strategy.value, inp, t, n) <= budget
        # lifetime identity
        assert outcome(strategy, inp, t).lifetime_ms == n * t
    assert n_max(ON_OFF, inp, t + dt) == n_max(ON_OFF, inp, t)
    assert n_max(IDLE, inp, t + dt) <= n_max(IDLE, inp, t)
    assert n_max(IDLE, inp.with_idle_power(inp.idle_wait.idle_power_mw + dp), t) <= n_max(IDLE, inp, t)
    cp = cross_point(inp, "budget")
    if cp.exists and cp.request_period_ms > inp.on_off.latency() * 1.001:
        lo = (inp.on_off.latency() + cp.request_period_ms) / 2
        assert n_max(IDLE, inp, lo) >= n_max(ON_OFF, inp, lo) - 1
        assert n_max(IDLE, inp, cp.request_period_ms * 2) <= n_max(ON_OFF, inp, cp.request_period_ms * 2) + 1
    # file round trip
    spec = parse_workload(dump_workload(inp.spec))
    assert spec == inp.spec


def test_c10_property_suite(sweep_input, verdict):
    failure = None
    try:
        _properties()
        item = parse_item(preset_path("lstm_item.yaml").read_bytes())
        assert parse_item(dump_item(item)) == item
        outcomes = sweep(sweep_input)
        assert emit_report(outcomes) == emit_report(sweep(sweep_input))
    except AssertionError as exc:
        failure = exc
    verdict("C10 property suite", failure is None,
            "tightness, lifetime identity, period independence, monotonicity, dominance, round trip, determinism"
            + ("" if failure is None else f" -- {failure}"))


def test_c11_sweep_performance(sweep_input, verdict):
    start = time.perf_counter()
    results = {name: sweep(sweep_input.with_idle_power(p)) for name, p in IDLE_MW.items()}
    elapsed = time.perf_counter() - start
    points = sum(len(r) for r in results.values())
    ok = elapsed < LIMIT_C11_S and points == 3 * 2 * 11001
    verdict("C11 sweep performance", ok,
            f"3 x 11001 periods x 2 strategies ({points} outcomes) in {elapsed:.3f} s, limit {LIMIT_C11_S} s")
