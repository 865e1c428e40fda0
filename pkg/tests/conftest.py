import sys
from collections import defaultdict
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

_outcomes = defaultdict(list)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        state = "xfailed" if hasattr(rep, "wasxfail") and rep.skipped else rep.outcome
        if hasattr(rep, "wasxfail") and rep.passed:
            state = "xpassed"
        _outcomes[marker.args[0]].append((item.name, state))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_outcomes):
        states = [s for _, s in _outcomes[n]]
        if any(s in ("failed", "xpassed") for s in states):
            verdict = "FAIL"
        elif any(s == "xfailed" for s in states):
            verdict = "PARTIAL" if any(s == "passed" for s in states) else "XFAIL"
        elif all(s == "passed" for s in states):
            verdict = "PASS"
        else:
            verdict = "INCOMPLETE"
        counts = ", ".join(f"{states.count(s)} {s}" for s in sorted(set(states)))
        tr.write_line(f"criterion {n}: {verdict} ({counts})")
        for name, s in _outcomes[n]:
            if s != "passed":
                tr.write_line(f"    {s}: {name}")
