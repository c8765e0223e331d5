import pytest

# criterion number -> [label, passed, measurements]
_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, label): test checks an acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        number, label = marker.args
        entry = _CRITERIA.setdefault(number, [label, True, []])
        entry[1] = entry[1] and rep.passed
        entry[2].extend(v for k, v in item.user_properties if k == "measured")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        label, ok, measured = _CRITERIA[number]
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {label}"
        if measured:
            line += "  [" + "; ".join(measured) + "]"
        terminalreporter.write_line(line)


@pytest.fixture
def measured(record_property):
    """Attach a measurement to the acceptance summary line."""
    return lambda text: record_property("measured", text)
