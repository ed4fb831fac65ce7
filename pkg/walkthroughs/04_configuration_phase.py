"""
Choosing SPI settings for the configuration phase
=================================================

Calibrate a device from two measured settings, then rank all 66
combinations of buswidth, SPI clock and compression.
"""

from fpga_duty import ConfigParams, estimate, optimize
from fpga_duty.files import calibrate_file
from fpga_duty.reproduce import preset_path

device = calibrate_file(preset_path("xc7s15_anchors.yaml"))
print("%s: %.0f bits, compression ratio %.4f" % (device.name, device.bitstream_bits, device.compression_ratio))
print("setup stage %.0f ms at %.0f mW = %.3f mJ"
      % (device.setup_time_ms, device.setup_power_mw, device.setup_energy_uj / 1e3))

result = optimize(device)
ranked = sorted(result.table, key=lambda e: e.total_energy_uj)
print("\ncheapest five:")
for e in ranked[:5]:
    p = e.params
    print("  x%d %2d MHz compressed=%-5s %8.2f ms %8.3f mJ"
          % (p.buswidth, p.freq_mhz, p.compressed, e.total_time_ms, e.total_energy_mj))

worst = estimate(device, ConfigParams(1, 3, False))
print("\nworst/best energy %.2fx, time %.2fx" % (worst.total_energy_uj / result.estimate.total_energy_uj,
                                                worst.total_time_ms / result.estimate.total_time_ms))

# the larger sibling borrows the shape of the XC7S15 power model
bigger = optimize(calibrate_file(preset_path("xc7s25_anchors.yaml")))
print("XC7S25 best: %.2f ms, %.2f mJ" % (bigger.estimate.total_time_ms, bigger.estimate.total_energy_mj))
