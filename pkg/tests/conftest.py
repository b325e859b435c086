import pytest

_results: dict[str, list[str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(label): acceptance criterion covered by a test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    label = marker.args[0]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _results.setdefault(label, []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_results, key=lambda s: int(s.split()[0][2:])):
        outcomes = _results[label]
        if "failed" in outcomes:
            status = "FAIL"
        elif all(o == "skipped" for o in outcomes):
            status = "SKIP"
        else:
            status = "PASS"
        terminalreporter.write_line(f"{status}  {label}")
