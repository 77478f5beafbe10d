import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): exit criterion of the build")


@pytest.fixture
def detail(request):
    """Append human-readable measurements to show next to the criterion verdict."""
    notes = []
    request.node._acceptance_notes = notes
    return notes


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or rep.when != "call" and not rep.failed:
        return
    number, title = marker.args
    entry = _RESULTS.setdefault(number, {"title": title, "ok": True, "notes": []})
    entry["ok"] &= rep.passed
    entry["notes"].extend(getattr(item, "_acceptance_notes", []))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        entry = _RESULTS[number]
        verdict = "PASS" if entry["ok"] else "FAIL"
        line = f"[{verdict}] {number}. {entry['title']}"
        if entry["notes"]:
            line += " -- " + "; ".join(entry["notes"])
        terminalreporter.write_line(line)
