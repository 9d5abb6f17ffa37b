import sys
import os

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_collection_modifyitems(config, items):
    if os.environ.get("ENTSUB_SLOW"):
        return
    skip = pytest.mark.skip(reason="set ENTSUB_SLOW=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(module.RESULTS, key=lambda k: int(k.split()[0][1:])):
        terminalreporter.write_line(module.RESULTS[label])
