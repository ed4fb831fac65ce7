import warnings

import pytest

from fpga_duty import (
    Anchor,
    ConfigParams,
    DeviceProfile,
    InconsistentAnchors,
    LoadPowerModel,
    SchemaError,
    UnknownParams,
    calibrate,
    calibrate_file,
    estimate,
    full_grid,
    optimize,
)
from fpga_duty.config import loading_time_ms
from fpga_duty.files import dump_device, load_device
from fpga_duty.reproduce import preset_path

BEST = ConfigParams(4, 66, True)
WORST = ConfigParams(1, 3, False)


@pytest.fixture(scope="module")
def xc7s15():
    return calibrate_file(preset_path("xc7s15_anchors.yaml"))


def test_grid_has_66_unique_settings():
    grid = full_grid()
    assert len(grid) == 66 == len(set(grid))
    assert {p.buswidth for p in grid} == {1, 2, 4}


@pytest.mark.parametrize("args", [(3, 66, True), (4, 65, True), (4, 66, "yes")])
def test_params_validated(args):
    with pytest.raises(SchemaError):
        ConfigParams(*args)


def test_loading_time_formula():
    # 4.4 Mbit over one lane at 3 MHz takes 1.4667 s
    assert loading_time_ms(4.4e6, WORST) == pytest.approx(4.4e6 / 3e3)
    assert loading_time_ms(4.4e6, BEST) == pytest.approx(4.4e6 / 264e3)


def test_setup_stage(xc7s15):
    assert xc7s15.setup_energy_uj == pytest.approx(7776.0)
    e = estimate(xc7s15, BEST)
    assert e.setup.time_ms == 27.0 and e.setup.power_mw == 288.0


def test_calibration_reproduces_anchors(xc7s15):
    best, worst = estimate(xc7s15, BEST), estimate(xc7s15, WORST)
    assert best.total_time_ms == pytest.approx(36.15, rel=1e-12)
    assert best.total_energy_mj == pytest.approx(11.85, rel=1e-12)
    assert worst.total_time_ms == pytest.approx(1496.61, rel=1e-12)
    assert worst.total_energy_mj == pytest.approx(475.56, rel=1e-12)
    assert xc7s15.bitstream_bits == pytest.approx(4_408_830, rel=1e-9)
    assert xc7s15.compression_ratio == pytest.approx(0.5479, abs=1e-4)


def test_power_model_passes_through_anchors(xc7s15):
    model = xc7s15.load_power_model
    for params, power in xc7s15.load_power_table.items():
        assert model.power(params) == pytest.approx(power, rel=1e-9)


def test_optimizer_picks_fastest_compressed(xc7s15):
    result = optimize(xc7s15)
    assert result.best == BEST
    assert len(result.table) == 66
    energies = [e.total_energy_uj for e in result.table]
    assert result.estimate.total_energy_uj == min(energies)


def test_optimizer_tie_break_prefers_shorter_phase():
    model = LoadPowerModel(100.0, 0.0)
    dev = DeviceProfile("flat", 1.0, 1.0, 0.0, 1.0, load_power_model=model)
    # no bitstream: every setting costs only the setup stage
    result = optimize(dev, [ConfigParams(1, 3, False), ConfigParams(4, 66, True)])
    assert result.estimate.loading.time_ms == 0.0
    assert result.best == ConfigParams(1, 3, False)


def test_missing_power_without_interpolation(xc7s15):
    with pytest.raises(UnknownParams):
        estimate(xc7s15, ConfigParams(2, 33, False), interpolate=False)
    assert estimate(xc7s15, ConfigParams(2, 33, False)).loading.power_mw > 0
    bare = DeviceProfile("bare", 27.0, 288.0, 1e6, 0.5)
    with pytest.raises(UnknownParams):
        estimate(bare, BEST)


def test_measured_table_overrides_model(xc7s15):
    p = ConfigParams(2, 33, False)
    dev = xc7s15.with_load_power_table({p: 999.0})
    assert estimate(dev, p).loading.power_mw == 999.0


def test_inconsistent_anchors_rejected():
    with pytest.raises(InconsistentAnchors):
        calibrate([Anchor(BEST, 20.0, 10_000.0)], 27.0, 288.0)
    with pytest.raises(InconsistentAnchors):
        calibrate([Anchor(BEST, 36.15, 5_000.0)], 27.0, 288.0)
    # two uncompressed anchors disagreeing on the bitstream size by far more than 5%
    with pytest.raises(InconsistentAnchors):
        calibrate([Anchor(WORST, 1496.61, 475_560.0), Anchor(ConfigParams(4, 66, False), 100.0, 40_000.0)],
                  27.0, 288.0)
    with pytest.raises(InconsistentAnchors):
        calibrate([], 27.0, 288.0)


def test_three_anchor_fit_recovers_offset():
    truth = LoadPowerModel(300.0, 0.5, 12.0)
    bits, ratio = 4e6, 0.6
    anchors = []
    for p in (ConfigParams(1, 3, False), ConfigParams(4, 66, True), ConfigParams(2, 33, True)):
        load_t = loading_time_ms(bits * (ratio if p.compressed else 1.0), p)
        anchors.append(Anchor(p, 27.0 + load_t, 27.0 * 288.0 + truth.power(p) * load_t))
    dev = calibrate(anchors, 27.0, 288.0)
    m = dev.load_power_model
    assert (m.base_mw, m.slope_mw_per_mbps, m.compressed_offset_mw) == pytest.approx((300.0, 0.5, 12.0))
    assert dev.compression_ratio == pytest.approx(ratio)


def test_single_anchor_without_reference_warns():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        dev = calibrate([Anchor(BEST, 36.15, 11_850.0)], 27.0, 288.0)
    assert dev.compression_ratio == 1.0
    assert any("compression" in str(w.message) for w in caught)


def test_xc7s25_uses_reference_shape(xc7s15):
    dev = calibrate_file(preset_path("xc7s25_anchors.yaml"))
    assert dev.compression_ratio == xc7s15.compression_ratio
    best = optimize(dev)
    assert best.best == BEST
    assert best.estimate.total_time_ms == pytest.approx(38.09, rel=1e-12)
    assert best.estimate.total_energy_mj == pytest.approx(13.75, rel=1e-12)
    ratio = dev.load_power_model.base_mw / xc7s15.load_power_model.base_mw
    assert dev.load_power_model.slope_mw_per_mbps == pytest.approx(xc7s15.load_power_model.slope_mw_per_mbps * ratio)


@pytest.mark.parametrize("name", ["xc7s15", "xc7s25"])
def test_bundled_device_files_are_up_to_date(name):
    regenerated = dump_device(calibrate_file(preset_path(f"{name}_anchors.yaml")))
    assert preset_path(f"{name}.yaml").read_text() == regenerated
    assert load_device(preset_path(f"{name}.yaml")) == calibrate_file(preset_path(f"{name}_anchors.yaml"))


def test_device_validation():
    with pytest.raises(SchemaError):
        DeviceProfile("x", 0.0, 1.0, 1.0, 0.5)
    with pytest.raises(SchemaError):
        DeviceProfile("x", 1.0, 1.0, 1.0, 1.5)
    with pytest.raises(SchemaError):
        DeviceProfile("x", 1.0, 1.0, 1.0, 0.5, load_power_table={BEST: 0.0})
