"""Result artifacts: sweep CSV, key=value summary and SVG plots.

Everything here is a pure function of its inputs and renders byte-identical
text for identical inputs; only :meth:`ReportBundle.write` touches the disk.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .config import ConfigParams
from .errors import DutyCycleError, SchemaError
from .model import MS_PER_H, MS_PER_S, StrategyKind, StrategyOutcome

SWEEP_COLUMNS = ("period_ms", "strategy", "n_max", "lifetime_s", "per_period_uj", "feasible")
TRACE_COLUMNS = ("timestamp_ms", "kind", "phase", "cumulative_uj")
OPTIMIZER_COLUMNS = ("buswidth", "freq_mhz", "compressed", "load_ms", "load_mw", "total_ms", "total_mj")

# upper bound on polyline vertices per series; keeps 11k-point sweeps readable
MAX_PLOT_POINTS = 2000


class ReportIOError(DutyCycleError, OSError):
    pass


def fmt(x) -> str:
    """Deterministic shortest round-trip text for numbers."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def short(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.6g}"


@dataclass
class ReportBundle:
    sweep_csv: str
    summary: str
    plots: Dict[str, str] = field(default_factory=dict)

    def write(self, outdir: Union[str, Path], stem: str = "results") -> List[Path]:
        outdir = Path(outdir)
        files = {f"{stem}.csv": self.sweep_csv, "summary.txt": self.summary}
        files.update(self.plots)
        written = []
        try:
            outdir.mkdir(parents=True, exist_ok=True)
            for name, text in files.items():
                path = outdir / name
                path.write_text(text, encoding="utf-8")
                written.append(path)
        except OSError as exc:
            raise ReportIOError(f"cannot write report to {outdir}: {exc}") from exc
        return written


Series = Mapping[str, Sequence[StrategyOutcome]]


def group_by_strategy(outcomes: Iterable[StrategyOutcome]) -> Dict[str, List[StrategyOutcome]]:
    groups: Dict[str, List[StrategyOutcome]] = {}
    for o in outcomes:
        groups.setdefault(StrategyKind(o.strategy).value, []).append(o)
    return groups


def sweep_csv(series: Series) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for label, outcomes in series.items():
        for o in outcomes:
            w.writerow([fmt(o.request_period_ms), label, o.n_max, fmt(o.lifetime_ms / MS_PER_S),
                        fmt(o.per_period_energy_uj), fmt(o.feasible)])
    return buf.getvalue()


def _columns(outcomes):
    periods = np.array([o.request_period_ms for o in outcomes], dtype=float)
    n = np.array([o.n_max for o in outcomes], dtype=float)
    life = np.array([o.lifetime_ms for o in outcomes], dtype=float)
    ok = np.array([o.feasible for o in outcomes], dtype=bool)
    return periods, n, life, ok


def _mean_ratio(num, den):
    p1, n1, _, ok1 = _columns(num)
    p2, n2, _, ok2 = _columns(den)
    common, i1, i2 = np.intersect1d(p1, p2, return_indices=True)
    keep = ok1[i1] & ok2[i2] & (n2[i2] > 0)
    if not keep.any():
        return None
    return float(np.mean(n1[i1][keep] / n2[i2][keep]))


def _at(outcomes, period):
    for o in outcomes:
        if math.isclose(o.request_period_ms, period, rel_tol=0, abs_tol=1e-9):
            return o
    return None


def grid_crossover(idle: Sequence[StrategyOutcome], on_off: Sequence[StrategyOutcome]) -> Optional[float]:
    """First grid period where On-Off executes more items than Idle-Waiting."""
    ref = {o.request_period_ms: o for o in on_off}
    for o in sorted(idle, key=lambda o: o.request_period_ms):
        other = ref.get(o.request_period_ms)
        if other is not None and o.feasible and other.feasible and o.n_max < other.n_max:
            return o.request_period_ms
    return None


def summary_lines(series: Series, reference: Optional[str] = None,
                  ratio_at: Sequence[Tuple[str, str, float]] = (),
                  extra: Optional[Mapping[str, object]] = None) -> List[Tuple[str, str]]:
    lines: List[Tuple[str, str]] = []
    for key, value in (extra or {}).items():
        lines.append((key, value if isinstance(value, str) else short(value)))

    for label, outcomes in series.items():
        periods, n, life, ok = _columns(outcomes)
        lines.append((f"{label}.points", str(len(outcomes))))
        lines.append((f"{label}.feasible_points", str(int(ok.sum()))))
        if ok.any():
            lines.append((f"{label}.n_max_min", str(int(n[ok].min()))))
            lines.append((f"{label}.n_max_max", str(int(n[ok].max()))))
            lines.append((f"{label}.n_max_mean", short(n[ok].mean())))
            lines.append((f"{label}.lifetime_h_mean", short(life[ok].mean() / MS_PER_H)))

    if reference is not None:
        for label, outcomes in series.items():
            if label == reference:
                continue
            ratio = _mean_ratio(outcomes, series[reference])
            if ratio is not None:
                lines.append((f"ratio_n_max_mean.{label}/{reference}", short(ratio)))

    for num, den, period in ratio_at:
        a, b = _at(series[num], period), _at(series[den], period)
        if a and b and a.feasible and b.feasible and b.n_max > 0:
            lines.append((f"ratio_n_max.{num}/{den}@{short(period)}ms", short(a.n_max / b.n_max)))

    on_off = [label for label, s in series.items() if s and s[0].strategy is StrategyKind.ON_OFF]
    idle = [label for label, s in series.items() if s and s[0].strategy is StrategyKind.IDLE_WAITING]
    if len(on_off) == 1 and len(series[on_off[0]]) > 1:
        for label in idle:
            cross = grid_crossover(series[label], series[on_off[0]])
            lines.append((f"grid_crossover_ms.{label}", "none" if cross is None else short(cross)))
    return lines


def _svg_ticks(lo, hi, count=5):
    if hi <= lo:
        return [lo]
    return list(np.linspace(lo, hi, count))


def svg_plot(series: Mapping[str, Tuple[np.ndarray, np.ndarray]], title: str, xlabel: str, ylabel: str,
             log_y: bool = False, width: int = 720, height: int = 440) -> str:
    """Line chart as a standalone SVG document."""
    palette = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")
    left, right, top, bottom = 80, 170, 40, 60
    pw, ph = width - left - right, height - top - bottom

    xs = [x for x, y in series.values() if len(x)]
    ys = [y for x, y in series.values() if len(y)]
    if not xs:
        x_lo, x_hi, y_lo, y_hi = 0.0, 1.0, 0.0, 1.0
    else:
        x_lo, x_hi = float(min(a.min() for a in xs)), float(max(a.max() for a in xs))
        y_lo, y_hi = float(min(a.min() for a in ys)), float(max(a.max() for a in ys))
    if log_y:
        y_lo = 10 ** math.floor(math.log10(max(y_lo, 1.0)))
        y_hi = 10 ** math.ceil(math.log10(max(y_hi, y_lo * 10)))
    elif y_hi == y_lo:
        y_hi = y_lo + 1.0
    else:
        y_lo = min(y_lo, 0.0)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0

    def sx(x):
        return left + (x - x_lo) / (x_hi - x_lo) * pw

    def sy(y):
        if log_y:
            frac = (math.log10(max(y, y_lo)) - math.log10(y_lo)) / (math.log10(y_hi) - math.log10(y_lo))
        else:
            frac = (y - y_lo) / (y_hi - y_lo)
        return top + ph - frac * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{left + pw / 2:.1f}" y="22" text-anchor="middle" font-size="14">{title}</text>',
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>',
    ]
    for x in _svg_ticks(x_lo, x_hi):
        px = sx(x)
        out.append(f'<line x1="{px:.1f}" y1="{top + ph}" x2="{px:.1f}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{px:.1f}" y="{top + ph + 18}" text-anchor="middle">{short(x)}</text>')
    if log_y:
        yticks = [10.0 ** k for k in range(int(round(math.log10(y_lo))), int(round(math.log10(y_hi))) + 1)]
    else:
        yticks = _svg_ticks(y_lo, y_hi)
    for y in yticks:
        py = sy(y)
        label = f"1e{int(round(math.log10(y)))}" if log_y else short(y)
        out.append(f'<line x1="{left - 5}" y1="{py:.1f}" x2="{left}" y2="{py:.1f}" stroke="black"/>')
        out.append(f'<line x1="{left}" y1="{py:.1f}" x2="{left + pw}" y2="{py:.1f}" stroke="#dddddd"/>')
        out.append(f'<text x="{left - 8}" y="{py + 4:.1f}" text-anchor="end">{label}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 15}" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="18" y="{top + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 18 {top + ph / 2:.1f})">{ylabel}</text>')

    for i, (label, (x, y)) in enumerate(series.items()):
        color = palette[i % len(palette)]
        if len(x) > MAX_PLOT_POINTS:
            idx = np.unique(np.linspace(0, len(x) - 1, MAX_PLOT_POINTS).round().astype(int))
            x, y = x[idx], y[idx]
        if len(x):
            pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, y))
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = top + 15 + 18 * i
        out.append(f'<line x1="{left + pw + 12}" y1="{ly}" x2="{left + pw + 32}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 37}" y="{ly + 4}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_report(results: Union[Series, Iterable[StrategyOutcome]], *, plots: bool = True,
                reference: Optional[str] = None, ratio_at: Sequence[Tuple[str, str, float]] = (),
                extra: Optional[Mapping[str, object]] = None) -> ReportBundle:
    """Render outcomes into CSV rows, a summary and (optionally) two SVG plots.

    ``results`` is either a flat list of outcomes, grouped by strategy, or a
    mapping from series label to outcomes; the label fills the CSV's
    strategy column. Item counts are plotted on a log axis.
    """
    series = dict(results) if isinstance(results, Mapping) else group_by_strategy(results)
    if not series or not any(series.values()):
        raise ValueError("nothing to report")
    summary = "".join(f"{k}={v}\n" for k, v in summary_lines(series, reference, ratio_at, extra))
    bundle = ReportBundle(sweep_csv(series), summary)
    if plots:
        counts, lives = {}, {}
        for label, outcomes in series.items():
            periods, n, life, ok = _columns(outcomes)
            counts[label] = (periods[ok], n[ok])
            lives[label] = (periods[ok], life[ok] / MS_PER_H)
        bundle.plots["n_max.svg"] = svg_plot(counts, "Executable workload items", "request period (ms)",
                                             "items (log scale)", log_y=True)
        bundle.plots["lifetime.svg"] = svg_plot(lives, "System lifetime", "request period (ms)",
                                                "lifetime (h)")
    return bundle


def trace_csv(result) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for e in result.events:
        w.writerow([fmt(e.timestamp_ms), e.kind.value, e.phase.value if e.phase else "", fmt(e.cumulative_uj)])
    return buf.getvalue()


def optimizer_csv(result) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(OPTIMIZER_COLUMNS)
    for e in result.table:
        p = e.params
        w.writerow([p.buswidth, p.freq_mhz, fmt(p.compressed), fmt(e.loading.time_ms), fmt(e.loading.power_mw),
                    fmt(e.total_time_ms), fmt(e.total_energy_mj)])
    return buf.getvalue()


def read_load_power_csv(text: str):
    """Measured loading powers from CSV columns ``buswidth,freq_mhz,compressed,load_mw``."""
    table = {}
    reader = csv.DictReader(io.StringIO(text))
    missing = {"buswidth", "freq_mhz", "compressed", "load_mw"} - set(reader.fieldnames or ())
    if missing:
        raise SchemaError(f"missing CSV columns {sorted(missing)}")
    for lineno, row in enumerate(reader, start=2):
        try:
            comp = row["compressed"].strip().lower()
            if comp not in ("true", "false", "1", "0"):
                raise ValueError(f"bad compressed flag {row['compressed']!r}")
            params = ConfigParams(int(row["buswidth"]), int(row["freq_mhz"]), comp in ("true", "1"))
            power = float(row["load_mw"])
        except (ValueError, SchemaError) as exc:
            raise SchemaError(str(exc), line=lineno) from None
        if not power > 0:
            raise SchemaError("load_mw must be positive", field="load_mw", line=lineno)
        table[params] = power
    return table
