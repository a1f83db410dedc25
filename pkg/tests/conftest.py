import re

_ACCEPTANCE = re.compile(r"test_acceptance\.py::test_criterion_(\d+)")


def pytest_terminal_summary(terminalreporter):
    lines = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            m = _ACCEPTANCE.search(getattr(rep, "nodeid", ""))
            if m is None or rep.when != "call" and outcome != "error":
                continue
            n = int(m.group(1))
            lines[n] = f"criterion {n:2d}: {'PASS' if outcome == 'passed' else 'FAIL'} ({rep.duration:.2f} s)"
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
