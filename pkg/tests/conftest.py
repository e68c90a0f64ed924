import os
from collections import defaultdict

import numpy as np
import pytest
from hypothesis import settings

from fastonl.graph import karate

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_CRITERIA = defaultdict(list)


@pytest.fixture(scope="session")
def karate_data():
    return karate()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        detail = ""
        if report.skipped and isinstance(report.longrepr, tuple):
            detail = report.longrepr[2].removeprefix("Skipped: ")
        elif report.failed:
            detail = str(report.longrepr).strip().splitlines()[-1][:160]
        _CRITERIA[marker.args[0]].append((item.name, report.outcome, detail))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        parts = _CRITERIA[number]
        ok = all(outcome == "passed" for _, outcome, _ in parts)
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}"
        failed = [name for name, outcome, _ in parts if outcome == "failed"]
        skipped = sorted({detail.split(" (")[0] for _, outcome, detail in parts if outcome == "skipped"})
        notes = [f"failed: {', '.join(failed)}"] if failed else []
        notes += [f"not verified, {reason}" for reason in skipped]
        if notes:
            line += "  (" + "; ".join(notes) + ")"
        terminalreporter.write_line(line)
