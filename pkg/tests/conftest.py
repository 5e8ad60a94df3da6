import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("lowsing", max_examples=40, deadline=None)
settings.load_profile("lowsing")

ACCEPTANCE_LINES: list = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
