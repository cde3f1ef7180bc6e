import sys
from collections import defaultdict
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_CRITERIA = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion exercised by the test")


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("criterion")
        if marker is not None:
            item.user_properties.append(("criterion", marker.args[0]))


def pytest_runtest_logreport(report):
    number = dict(report.user_properties).get("criterion")
    if number is None:
        return
    if report.when == "call" or report.outcome != "passed":
        _CRITERIA[number].append((report.nodeid, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        results = _CRITERIA[number]
        failed = [nodeid for nodeid, outcome in results if outcome != "passed"]
        status = "FAIL" if failed else "PASS"
        terminalreporter.write_line(f"criterion {number:2d}: {status} ({len(results) - len(failed)}/{len(results)} checks)")
        for nodeid in failed:
            terminalreporter.write_line(f"    failed: {nodeid}")
