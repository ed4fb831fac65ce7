import subprocess
import sys

import pytest

from fpga_duty.cli import main

ITEM = "preset:lstm_item.yaml"
SWEEP = "preset:exp2_workload.yaml"
AT40 = "preset:workload_40ms.yaml"


def summary(path):
    return dict(line.split("=", 1) for line in (path / "summary.txt").read_text().splitlines())


def test_compare_writes_report(tmp_path, capsys):
    out = tmp_path / "cmp"
    assert main(["compare", "--item", ITEM, "--workload", SWEEP, "--out", str(out)]) == 0
    values = summary(out)
    assert values["crosspoint_ms"] == "88.2899"
    assert values["ratio_n_max.idle-waiting/on-off@40ms"] == "2.207"
    assert {p.name for p in out.iterdir()} == {"results.csv", "summary.txt", "n_max.svg", "lifetime.svg"}
    assert "crosspoint_ms=88.2899" in capsys.readouterr().out


def test_outputs_are_byte_identical(tmp_path):
    for name in ("a", "b"):
        assert main(["sweep", "--item", ITEM, "--workload", SWEEP, "--out", str(tmp_path / name)]) == 0
    for f in ("results.csv", "summary.txt", "n_max.svg", "lifetime.svg"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_stamp_is_opt_in(tmp_path):
    main(["sweep", "--item", ITEM, "--workload", AT40, "--no-plot", "--out", str(tmp_path / "plain")])
    main(["sweep", "--item", ITEM, "--workload", AT40, "--no-plot", "--stamp", "--out", str(tmp_path / "s")])
    assert "generated_at" not in (tmp_path / "plain" / "summary.txt").read_text()
    assert "generated_at" in (tmp_path / "s" / "summary.txt").read_text()


def test_out_defaults_to_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("FPGA_DUTY_OUT", str(tmp_path / "env"))
    assert main(["sweep", "--item", ITEM, "--workload", AT40, "--no-plot"]) == 0
    assert (tmp_path / "env" / "results.csv").exists()


def test_sweep_with_several_idle_powers(tmp_path):
    args = ["sweep", "--item", ITEM, "--workload", SWEEP, "--strategy", "idle-waiting", "--no-plot",
            "--out", str(tmp_path)]
    for p in ("134.3", "34.2", "24"):
        args += ["--idle-power-mw", p]
    assert main(args) == 0
    values = summary(tmp_path)
    assert float(values["ratio_n_max_mean.idle-waiting@34.2mW/idle-waiting@134.3mW"]) == pytest.approx(3.914, abs=1e-3)
    assert float(values["idle-waiting@24mW.lifetime_h_mean"]) == pytest.approx(47.75, abs=0.01)


def test_simulate_full_trace(tmp_path):
    assert main(["simulate", "--item", ITEM, "--workload", AT40, "--max-events", "100",
                 "--out", str(tmp_path)]) == 0
    values = summary(tmp_path)
    assert values["on-off.n_max_min"] == "349708"
    assert values["idle-waiting.n_max_min"] == "771805"
    lines = (tmp_path / "trace_on-off.csv").read_text().splitlines()
    assert lines[0] == "timestamp_ms,kind,phase,cumulative_uj"
    assert len(lines) == 1 + 102


def test_simulate_counts_only(tmp_path):
    assert main(["simulate", "--item", ITEM, "--workload", SWEEP, "--period-ms", "10",
                 "--strategy", "idle-waiting", "--trace", "counts", "--out", str(tmp_path)]) == 0
    assert summary(tmp_path)["idle-waiting.n_max_min"] == "3085314"
    assert not list(tmp_path.glob("trace_*.csv"))


def test_simulate_needs_single_period(tmp_path, capsys):
    assert main(["simulate", "--item", ITEM, "--workload", SWEEP, "--out", str(tmp_path)]) == 1
    assert "period" in capsys.readouterr().err


def test_infeasible_period_exit_code(tmp_path, capsys):
    code = main(["simulate", "--item", ITEM, "--workload", AT40, "--period-ms", "20",
                 "--strategy", "on-off", "--out", str(tmp_path)])
    assert code == 1
    assert "infeasible" in capsys.readouterr().err


def test_crosspoint(tmp_path, capsys):
    assert main(["crosspoint", "--item", ITEM, "--idle-power-mw", "24", "--out", str(tmp_path)]) == 0
    assert summary(tmp_path)["crosspoint_ms"] == "493.871"
    assert main(["crosspoint", "--item", ITEM, "--mode", "budget", "--out", str(tmp_path)]) == 1


def test_config_opt_and_calibrate(tmp_path):
    assert main(["config-opt", "--device", "preset:xc7s15_anchors.yaml", "--out", str(tmp_path / "o")]) == 0
    assert summary(tmp_path / "o")["best"].startswith("4,66,true")
    assert main(["calibrate", "--anchors", "preset:xc7s25_anchors.yaml", "--out", str(tmp_path / "d")]) == 0
    device = tmp_path / "d" / "xc7s25.yaml"
    assert main(["config-opt", "--device", str(device), "--out", str(tmp_path / "o25")]) == 0
    assert summary(tmp_path / "o25")["best_total_mj"] == "13.75"


def test_config_opt_with_measured_powers(tmp_path):
    table = tmp_path / "power.csv"
    table.write_text("buswidth,freq_mhz,compressed,load_mw\n4,66,true,5000\n")
    assert main(["config-opt", "--device", "preset:xc7s15.yaml", "--load-power-csv", str(table),
                 "--out", str(tmp_path)]) == 0
    assert not summary(tmp_path)["best"].startswith("4,66,true")


def test_schema_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "w.yaml"
    bad.write_text("schema: 1\nbudget_j: -4\nrequest_period_ms: 40\n")
    assert main(["sweep", "--item", ITEM, "--workload", str(bad), "--out", str(tmp_path)]) == 1
    err = capsys.readouterr().err
    assert "budget_j" in err and "line 2" in err


def test_io_error_exit_code(tmp_path):
    assert main(["sweep", "--item", str(tmp_path / "missing.yaml"), "--workload", AT40,
                 "--out", str(tmp_path)]) == 2
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    assert main(["sweep", "--item", ITEM, "--workload", AT40, "--out", str(blocker / "x")]) == 2


def test_reproduce_exit_codes(tmp_path):
    assert main(["reproduce", "exp1", "--strict", "--out", str(tmp_path)]) == 0
    assert main(["reproduce", "exp2", "--strict", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "reproduce_exp2.csv").exists()


def test_module_entry_point_help():
    proc = subprocess.run([sys.executable, "-m", "fpga_duty", "sweep", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "mW" in proc.stdout and "--out" in proc.stdout
