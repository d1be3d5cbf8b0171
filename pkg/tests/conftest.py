import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

GOLDEN = Path(__file__).parent / "golden" / "tables.json"

_criteria: dict[int, list[str]] = {}
_titles: dict[int, str] = {}
_node_criterion: dict[str, int] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            n, title = mark.args
            _titles[n] = title
            _criteria.setdefault(n, [])
            _node_criterion[item.nodeid] = n


def pytest_runtest_logreport(report):
    n = _node_criterion.get(report.nodeid)
    if n is None:
        return
    if report.when == "call" or report.outcome != "passed":
        _criteria[n].append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        outcomes = _criteria[n]
        if not outcomes:
            status = "NOT RUN"
        else:
            status = "PASS" if all(o == "passed" for o in outcomes) else "FAIL"
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {_titles[n]}")


@pytest.fixture(scope="session")
def golden():
    return json.loads(GOLDEN.read_text())


@pytest.fixture(scope="session")
def full_report():
    from sicbell.report import build_report

    return {r.set_name: r for r in build_report("all")}
