import pytest

from fpga_duty import AnalyticInput, ItemProfile, WorkloadSpec
from fpga_duty.files import load_item, load_workload
from fpga_duty.model import phases_from_rows
from fpga_duty.reproduce import preset_path

BUDGET_UJ = 4147e6

LSTM_ROWS = [
    ("configuration", 327.9, 36.145),
    ("data_loading", 138.7, 0.0100),
    ("inference", 171.4, 0.0281),
    ("data_offloading", 144.1, 0.0020),
]
BASELINE_IDLE_MW = 134.3


@pytest.fixture(scope="session")
def lstm_item():
    return ItemProfile(phases_from_rows(LSTM_ROWS), BASELINE_IDLE_MW)


@pytest.fixture(scope="session")
def lstm_input(lstm_item):
    spec = WorkloadSpec(BUDGET_UJ, request_period_ms=40.0)
    return AnalyticInput.from_item(spec, lstm_item)


@pytest.fixture(scope="session")
def sweep_input():
    item = load_item(preset_path("lstm_item.yaml"))
    return item.analytic_input(load_workload(preset_path("exp2_workload.yaml")))
