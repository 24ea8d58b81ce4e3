from pathlib import Path

import pytest

import pcycle_planner
from pcycle_planner.topo import read_network

DATA = Path(pcycle_planner.__file__).parent / "data"

SMALL = ["ring3", "k4", "subdivided_k4", "five_node", "ring5", "prism6", "cube8", "n7e14"]
ALL = SMALL + ["nsfnet", "cost239"]


def fixture_path(name: str) -> Path:
    return DATA / f"{name}.topo"


def load(name: str):
    return read_network(fixture_path(name))


@pytest.fixture
def k4():
    return load("k4")


@pytest.fixture
def ring3():
    return load("ring3")


# -- acceptance summary --------------------------------------------------------
# Tests marked ``criterion(n, title)`` roll up into one PASS/FAIL line per n.

_CRITERIA: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and not rep.failed):
        return
    n, title = mark.args
    entry = _CRITERIA.setdefault(n, {"title": title, "failed": [], "passed": 0})
    if rep.failed:
        entry["failed"].append(item.name)
    elif rep.when == "call":
        entry["passed"] += 1


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        e = _CRITERIA[n]
        verdict = "FAIL" if e["failed"] else "PASS"
        line = f"criterion {n} {verdict}: {e['title']} ({e['passed']} passed"
        line += f", {len(e['failed'])} failed: {', '.join(e['failed'])})" if e["failed"] else ")"
        terminalreporter.write_line(line)
