import re
import sys

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Print one pass/fail line per acceptance criterion."""
    mod = sys.modules.get("test_acceptance")
    if mod is None:
        return
    recorded = {int(line.split(":")[0].split()[1]): line for line in mod.LINES}
    seen = set()
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            match = re.search(r"test_criterion_0*(\d+)",
                              getattr(rep, "nodeid", ""))
            if match:
                seen.add(int(match.group(1)))
    if not seen:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(seen):
        terminalreporter.write_line(
            recorded.get(n, f"criterion {n}: FAIL - see test output above"))
