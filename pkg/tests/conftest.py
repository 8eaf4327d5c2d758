import os
from pathlib import Path

import numpy as np
import pytest

from kmdp import KaplanMeierEstimator, SurvivalData, build_grid

REPO_ROOT = Path(__file__).resolve().parents[1]
DATA_DIR = REPO_ROOT / "data"

# Fig-1-style toy: 5 individuals, censored at t=3 and t=5.
TOY_TIMES = [1, 2, 3, 4, 5]
TOY_EVENTS = [1, 1, 0, 1, 0]
TOY_SURVIVAL = [1.0, 0.8, 0.6, 0.6, 0.3, 0.3]
TOY_PROB = [0.0, 0.2, 0.2, 0.0, 0.3, 0.0, 0.3]


@pytest.fixture
def toy_data():
    return SurvivalData(times=np.array(TOY_TIMES, float), event_observed=np.array(TOY_EVENTS))


@pytest.fixture
def toy_grid():
    return build_grid(t_max=5, bin_size=1)


@pytest.fixture
def toy_curve(toy_data):
    return KaplanMeierEstimator(bin_size=1.0, t_max=5.0).fit(TOY_TIMES, TOY_EVENTS).curve_


@pytest.fixture
def uncensored_toy():
    # No censoring: weighted client averaging is exact for this dataset.
    times = [1, 1, 2, 2, 3, 3, 4, 4, 5, 5, 6, 6]
    return SurvivalData(times=np.array(times, float), event_observed=np.ones(len(times)))


@pytest.fixture
def synthetic_csv():
    return DATA_DIR / "synthetic_uncensored.csv"


@pytest.fixture
def toy_csv():
    return DATA_DIR / "toy_fig1.csv"


def real_dataset_dir() -> Path:
    return Path(os.environ.get("KMDP_DATA_DIR", REPO_ROOT / "data" / "real"))


def require_real_dataset(name: str) -> Path:
    path = real_dataset_dir() / f"{name}.csv"
    if not path.exists():
        pytest.skip(
            f"requires the {name} export at {path} "
            "(see README: obtaining the evaluation datasets)"
        )
    return path


# One line per acceptance criterion, rendered after the test summary.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
