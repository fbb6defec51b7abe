"""Collects acceptance outcomes and prints one PASS/FAIL line per criterion."""

import pytest

_CRITERIA: dict[str, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id, title): acceptance criterion the test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when not in ("setup", "call"):
        return
    cid, title = marker.args
    entry = _CRITERIA.setdefault(cid, {"title": title, "ran": 0, "failed": []})
    if rep.when == "call":
        entry["ran"] += 1
    if rep.failed:
        entry["failed"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_CRITERIA, key=lambda c: int(c)):
        e = _CRITERIA[cid]
        status = "FAIL" if e["failed"] or not e["ran"] else "PASS"
        line = f"criterion {cid:>2} {status}  {e['title']}"
        if e["failed"]:
            line += f"  [failed: {', '.join(e['failed'])}]"
        terminalreporter.write_line(line)
