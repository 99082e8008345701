import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

# criterion number -> (title, passed, seconds, detail); filled by the acceptance tests
_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call":
        return
    n, title = mark.args
    detail = "" if rep.passed else str(rep.longrepr).strip().splitlines()[-1][:160]
    _CRITERIA[n] = (title, rep.passed, rep.duration, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, ok, secs, detail = _CRITERIA[n]
        line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'} ({secs:.1f} s) {title}"
        if detail:
            line += f" -- {detail}"
        terminalreporter.write_line(line)
