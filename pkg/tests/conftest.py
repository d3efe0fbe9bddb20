import time

import pytest

_CRITERIA: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


@pytest.fixture
def cache_dir(tmp_path, monkeypatch):
    monkeypatch.delenv("CMNC_CACHE", raising=False)
    return tmp_path / "hcp"


@pytest.fixture
def measure(request):
    """Collect measured values for the acceptance summary line of the running test."""
    found = {}
    request.node.user_properties.append(("measured", found))
    return found


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call":
        return
    n, title = mark.args
    measured = dict(item.user_properties).get("measured", {})
    entry = _CRITERIA.setdefault(n, {"title": title, "passed": True, "seconds": 0.0, "measured": {}})
    entry["passed"] &= rep.passed
    entry["seconds"] += rep.duration
    entry["measured"].update(measured)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        e = _CRITERIA[n]
        tag = "PASS" if e["passed"] else "FAIL"
        detail = ", ".join(f"{k}={v}" for k, v in e["measured"].items())
        tr.write_line(f"[{tag}] criterion {n:>2}: {e['title']} ({e['seconds']:.1f} s){'; ' + detail if detail else ''}")


@pytest.fixture
def stopwatch():
    start = time.perf_counter()
    return lambda: time.perf_counter() - start
