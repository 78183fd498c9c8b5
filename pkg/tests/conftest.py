import re

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


_CRITERION = re.compile(r"test_c(\d+)_(\w+)")


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion (all parametrized parts must pass)."""
    results = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            m = _CRITERION.search(nodeid)
            if "test_acceptance.py" not in nodeid or not m:
                continue
            if rep.when != "call" and outcome == "passed":
                continue
            key = (int(m.group(1)), m.group(2))
            results[key] = results.get(key, True) and outcome == "passed"
    if results:
        terminalreporter.section("acceptance criteria")
        for (num, name), ok in sorted(results.items()):
            terminalreporter.write_line(f"criterion {num:2d} {'PASS' if ok else 'FAIL'}  {name}")
