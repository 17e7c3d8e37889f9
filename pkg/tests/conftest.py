import hypothesis

hypothesis.settings.register_profile(
    "ci", deadline=None, max_examples=60, derandomize=True
)
hypothesis.settings.load_profile("ci")

_acceptance_results = []


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::", 1)[1]
    _acceptance_results.append((name, report.outcome, report.duration))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, outcome, duration in _acceptance_results:
        flag = "PASS" if outcome == "passed" else outcome.upper()
        terminalreporter.write_line(f"[{flag}] {name} ({duration:.1f}s)")
