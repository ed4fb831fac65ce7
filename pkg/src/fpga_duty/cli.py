"""Command-line front end.

Exit status: 0 on success, 1 on a schema or feasibility error, 2 on an I/O
error. Input paths may name a bundled preset as ``preset:<file>``, e.g.
``--item preset:lstm_item.yaml``.
"""

from __future__ import annotations

import argparse
import datetime
import os
import sys
from pathlib import Path
from typing import List, Optional

from . import analytic
from .analytic import evaluate_grid
from .config import full_grid, optimize
from .errors import DutyCycleError
from .files import calibrate_file, dump_device, load_device, load_item, load_workload
from .model import StrategyKind, WorkloadSpec
from .report import ReportBundle, ReportIOError, emit_report, optimizer_csv, read_load_power_csv, short, trace_csv
from .reproduce import EXPERIMENTS, checks_csv, preset_path, reproduce
from .trace import DEFAULT_MAX_EVENTS, TraceDetail, run_trace

OUT_ENV = "FPGA_DUTY_OUT"
STRATEGY_CHOICES = ("on-off", "idle-waiting", "both")


class CliError(DutyCycleError):
    pass


def _path(value: str) -> Path:
    if value.startswith("preset:"):
        return preset_path(value[len("preset:"):])
    return Path(value)


def _strategies(choice: str) -> List[StrategyKind]:
    return list(StrategyKind) if choice == "both" else [StrategyKind(choice)]


def _stamp(bundle: ReportBundle, args) -> ReportBundle:
    if args.stamp:
        now = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
        bundle.summary += f"generated_at={now}\n"
    return bundle


def _finish(bundle: ReportBundle, args, stem: str = "results") -> None:
    _stamp(bundle, args)
    for path in bundle.write(args.out, stem):
        print(f"wrote {path}", file=sys.stderr)
    sys.stdout.write(bundle.summary)


def _inputs(args, spec: Optional[WorkloadSpec] = None):
    item = load_item(_path(args.item))
    if spec is None:
        spec = load_workload(_path(args.workload))
    return item.analytic_input(spec, getattr(args, "idle_power_mw", None))


def cmd_simulate(args) -> int:
    spec = load_workload(_path(args.workload))
    if args.period_ms is not None:
        spec = spec.at_period(args.period_ms)
    elif spec.request_period_ms is None:
        raise CliError("simulate needs a single request period: use request_period_ms or --period-ms")
    inp = _inputs(args, spec)
    period = spec.request_period_ms
    detail = TraceDetail(args.trace)
    outcomes, extra_files = [], {}
    for strategy in _strategies(args.strategy):
        result = run_trace(strategy, inp, period, detail, args.max_events)
        outcomes.append(result.outcome)
        if detail is TraceDetail.FULL and result.events:
            extra_files[f"trace_{strategy.value}.csv"] = trace_csv(result)
        if result.elided:
            print(f"{strategy.value}: trace capped, {result.elided} events elided", file=sys.stderr)
    bundle = emit_report(outcomes, plots=False, extra={"request_period_ms": period,
                                                       "budget_j": spec.budget_j})
    bundle.plots.update(extra_files)
    _finish(bundle, args)
    infeasible = [o.strategy.value for o in outcomes if not o.feasible]
    if infeasible:
        print(f"error: request period {short(period)} ms is infeasible for {', '.join(infeasible)}",
              file=sys.stderr)
        return 1
    return 0


def _series(args, inp):
    periods = inp.spec.periods()
    series = {}
    powers = args.idle_power_mw_list or [None]
    for strategy in _strategies(args.strategy):
        if strategy is StrategyKind.IDLE_WAITING and len(powers) > 1:
            for p in powers:
                grid = evaluate_grid(strategy, inp.with_idle_power(p), periods)
                series[f"idle-waiting@{short(p)}mW"] = grid.outcomes()
        else:
            sub = inp.with_idle_power(powers[0]) if powers[0] is not None else inp
            series[strategy.value] = evaluate_grid(strategy, sub, periods).outcomes()
    return series


def cmd_sweep(args) -> int:
    inp = _inputs(args)
    series = _series(args, inp)
    # several idle-power levels: the first one is the reference for the ratios
    idle = [label for label in series if label.startswith("idle-waiting@")]
    reference = idle[0] if idle else None
    bundle = emit_report(series, plots=args.plot, reference=reference, extra={"budget_j": inp.spec.budget_j})
    _finish(bundle, args)
    return 0


def cmd_crosspoint(args) -> int:
    spec = load_workload(_path(args.workload)) if args.workload else WorkloadSpec(1.0, request_period_ms=1.0)
    if args.mode == "budget" and not args.workload:
        raise CliError("--mode budget needs --workload for the energy budget")
    inp = _inputs(args, spec)
    cp = analytic.cross_point(inp, args.mode)
    lines = {"mode": cp.mode, "exists": str(cp.exists).lower()}
    if cp.exists:
        lines["crosspoint_ms"] = short(cp.request_period_ms)
        lines["bisection_ms"] = short(cp.bisection_ms)
    bundle = ReportBundle("", "".join(f"{k}={v}\n" for k, v in lines.items()))
    _stamp(bundle, args)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "summary.txt").write_text(bundle.summary, encoding="utf-8")
    except OSError as exc:
        raise ReportIOError(f"cannot write report to {out}: {exc}") from exc
    sys.stdout.write(bundle.summary)
    return 0


def cmd_compare(args) -> int:
    args.strategy = "both"
    args.idle_power_mw_list = [args.idle_power_mw] if args.idle_power_mw is not None else None
    inp = _inputs(args)
    series = _series(args, inp)
    cp = analytic.cross_point(inp)
    extra = {"budget_j": inp.spec.budget_j,
             "crosspoint_ms": short(cp.request_period_ms) if cp.exists else "none"}
    ratio_at = [("idle-waiting", "on-off", t) for t in args.at_ms]
    periods = inp.spec.periods()
    for t in args.at_ms:
        if not any(abs(p - t) < 1e-9 for p in periods):
            # not on the sweep grid: evaluate the point directly
            a = analytic.outcome(StrategyKind.IDLE_WAITING, inp, t)
            b = analytic.outcome(StrategyKind.ON_OFF, inp, t)
            if a.feasible and b.feasible and b.n_max:
                extra[f"ratio_n_max.idle-waiting/on-off@{short(t)}ms"] = short(a.n_max / b.n_max)
    bundle = emit_report(series, plots=args.plot, ratio_at=ratio_at, extra=extra)
    _finish(bundle, args)
    return 0


def cmd_config_opt(args) -> int:
    path = _path(args.device)
    device = calibrate_file(path) if path.name.endswith("anchors.yaml") else load_device(path)
    if args.load_power_csv:
        device = device.with_load_power_table(read_load_power_csv(Path(args.load_power_csv).read_text()))
    result = optimize(device, full_grid(), interpolate=not args.no_interpolate)
    best = result.estimate
    b = result.best
    summary = (f"device={device.name}\n"
               f"best={b.buswidth},{b.freq_mhz},{str(b.compressed).lower()},"
               f"{short(best.loading.time_ms)},{short(best.loading.power_mw)},"
               f"{short(best.total_time_ms)},{short(best.total_energy_mj)}\n"
               f"best_total_ms={short(best.total_time_ms)}\n"
               f"best_total_mj={short(best.total_energy_mj)}\n")
    bundle = ReportBundle(optimizer_csv(result), summary)
    _finish(bundle, args, stem="optimizer")
    return 0


def cmd_calibrate(args) -> int:
    device = calibrate_file(_path(args.anchors))
    text = dump_device(device)
    out = Path(args.out)
    target = out if out.suffix in (".yaml", ".yml") else out / f"{device.name.lower()}.yaml"
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise ReportIOError(f"cannot write {target}: {exc}") from exc
    print(f"wrote {target}", file=sys.stderr)
    return 0


def cmd_reproduce(args) -> int:
    names = EXPERIMENTS if args.experiment == "all" else (args.experiment,)
    checks = [c for name in names for c in reproduce(name)]
    text = checks_csv(checks)
    target = Path(args.out) / f"reproduce_{args.experiment}.csv"
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise ReportIOError(f"cannot write {target}: {exc}") from exc
    sys.stdout.write(text)
    failed = [c for c in checks if not c.passed]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed; wrote {target}", file=sys.stderr)
    return 1 if failed and args.strict else 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=os.environ.get(OUT_ENV, "out"),
                        help=f"output directory (default: ${OUT_ENV} or ./out)")
    common.add_argument("--stamp", action="store_true",
                        help="append a generated_at timestamp to summary.txt (breaks byte-identical output)")

    item = argparse.ArgumentParser(add_help=False)
    item.add_argument("--item", required=True, help="workload-item YAML (powers in mW, times in ms)")

    workload = argparse.ArgumentParser(add_help=False)
    workload.add_argument("--workload", required=True,
                          help="workload YAML (budget in J, request period or sweep in ms)")

    plot = argparse.ArgumentParser(add_help=False)
    plot.add_argument("--plot", dest="plot", action="store_true", default=True, help="write SVG plots (default)")
    plot.add_argument("--no-plot", dest="plot", action="store_false", help="skip SVG plots")

    idle = argparse.ArgumentParser(add_help=False)
    idle.add_argument("--idle-power-mw", type=float, default=None,
                      help="override the item's idle power, in mW")

    parser = argparse.ArgumentParser(prog="fpga-duty", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common, item, workload, idle],
                       help="trace one request period item by item")
    p.add_argument("--strategy", choices=STRATEGY_CHOICES, default="both")
    p.add_argument("--period-ms", type=float, default=None,
                   help="request period in ms; overrides the workload file")
    p.add_argument("--trace", choices=[d.value for d in TraceDetail], default="full",
                   help="full: write per-event CSV; counts: item counts only")
    p.add_argument("--max-events", type=int, default=DEFAULT_MAX_EVENTS,
                   help="cap on recorded events per trace (count)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", parents=[common, item, workload, plot],
                       help="closed-form item counts and lifetimes over the workload's periods")
    p.add_argument("--strategy", choices=STRATEGY_CHOICES, default="both")
    p.add_argument("--idle-power-mw", dest="idle_power_mw_list", type=float, action="append",
                   help="idle power in mW; repeat to compare several levels (first is the reference)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("crosspoint", parents=[common, item, idle],
                       help="request period (ms) below which Idle-Waiting wins")
    p.add_argument("--workload", default=None, help="workload YAML; needed for --mode budget (J)")
    p.add_argument("--mode", choices=("asymptotic", "budget"), default="asymptotic")
    p.set_defaults(func=cmd_crosspoint)

    p = sub.add_parser("compare", parents=[common, item, workload, idle, plot],
                       help="both strategies over the sweep, with cross point and ratios")
    p.add_argument("--at-ms", type=float, action="append", default=None,
                   help="request period in ms at which to report the item-count ratio (default 40)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("config-opt", parents=[common],
                       help="energy-optimal SPI configuration setting for a device")
    p.add_argument("--device", required=True, help="device YAML or *anchors.yaml (times ms, powers mW)")
    p.add_argument("--load-power-csv", default=None,
                   help="measured loading powers: buswidth,freq_mhz,compressed,load_mw (mW)")
    p.add_argument("--no-interpolate", action="store_true",
                   help="fail on settings without a measured loading power")
    p.set_defaults(func=cmd_config_opt)

    p = sub.add_parser("calibrate", parents=[common], help="fit a device YAML from measured anchors")
    p.add_argument("--anchors", required=True, help="anchors YAML (times ms, energies mJ, powers mW)")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("reproduce", parents=[common], help="rerun a reference experiment and check it")
    p.add_argument("experiment", choices=EXPERIMENTS + ("all",))
    p.add_argument("--strict", action="store_true", help="exit 1 if any check fails")
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "at_ms", "unset") is None:
        args.at_ms = [40.0]
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DutyCycleError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
