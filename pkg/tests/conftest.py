import numpy as np
import pytest
from hypothesis import settings

from agehawkes.core import AgeStructure, ContactMatrix, EpidemicConfig, IntervalGrid
from agehawkes.kernels import GENERATION_INTERVAL, REPORTING_DELAY, KernelSpec
from agehawkes.scenarios import two_group_config

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def single_group_config(k=4, population=10_000, susceptible=None, m=1.0, beta=0.5, gi=GENERATION_INTERVAL,
                        width=7.0, t0=21.0, **kw):
    return EpidemicConfig(
        ages=AgeStructure(["all"], [population]),
        contacts=ContactMatrix([[m]]),
        grid=IntervalGrid.uniform(t0, width, k),
        beta=beta,
        gi_kernel=gi,
        obs_kernel=REPORTING_DELAY,
        initial_susceptibles=[population if susceptible is None else susceptible],
        **kw,
    )


@pytest.fixture
def cfg2():
    return two_group_config(k=4)


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(LINES):
            terminalreporter.write_line(LINES[n])
