import re

_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+?)(\[|$)")


def pytest_terminal_summary(terminalreporter):
    outcomes = {}
    for status in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(status, []):
            if report.when != "call" and status != "error":
                continue
            m = _CRITERION.search(report.nodeid)
            if not m:
                continue
            key = (int(m.group(1)), m.group(2))
            ok = status == "passed"
            outcomes[key] = outcomes.get(key, True) and ok
    if not outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for (num, name), ok in sorted(outcomes.items()):
        terminalreporter.write_line(f"criterion {num:2d} {'PASS' if ok else 'FAIL'}  {name.replace('_', ' ')}")
