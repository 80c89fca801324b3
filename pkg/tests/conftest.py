"""Shared fixtures and the acceptance summary printed after the run."""

import pytest

from freelunch import law_rademacher, law_two_point

LAWS = {
    "rademacher": law_rademacher(),
    "two_point": law_two_point(-2.0, 1.0),
}


@pytest.fixture(params=sorted(LAWS))
def law(request):
    return LAWS[request.param]


def pytest_terminal_summary(terminalreporter):
    rows = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if getattr(rep, "when", None) != "call" or "test_acceptance.py" not in rep.nodeid:
                continue
            props = dict(rep.user_properties)
            rows.append((props.get("criterion", 99), rep.nodeid.split("::")[-1], rep.passed, props))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for num, name, ok, props in sorted(rows):
        timing = ""
        if "elapsed" in props:
            timing = f"  ({props['elapsed']:.2f}s of {props['budget']:g}s budget)"
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {num:>2}: {name}{timing}")
