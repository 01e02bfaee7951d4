import json
from pathlib import Path

import pytest

from trendtext.core import TimeSeries

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def goldens() -> dict:
    return json.loads((DATA_DIR / "goldens.json").read_text())


@pytest.fixture(scope="session")
def ankle_series(goldens) -> TimeSeries:
    g = goldens["ankle_accel"]
    return TimeSeries(
        values=g["readings"],
        sample_rate_hz=g["sample_rate_hz"],
        sensor_name=g["sensor_name"],
        channel_id="la_acc_y",
    )


@pytest.fixture(scope="session")
def gyro_series(goldens) -> TimeSeries:
    g = goldens["arm_gyro"]
    return TimeSeries(
        values=g["readings"],
        sample_rate_hz=g["sample_rate_hz"],
        sensor_name=g["sensor_name"],
        channel_id="rla_gyro_x",
    )
