import pytest

_LINES: dict[int, str] = {}


class Criterion:
    def __init__(self, number: int, title: str):
        self.number, self.title = number, title
        self.done = False

    def report(self, ok: bool, detail: str):
        _LINES[self.number] = f"{'PASS' if ok else 'FAIL'} criterion {self.number} ({self.title}): {detail}"
        self.done = True
        assert ok, _LINES[self.number]


@pytest.fixture
def criterion(request):
    marker = request.node.get_closest_marker("criterion")
    c = Criterion(*marker.args)
    yield c
    if not c.done:
        _LINES[c.number] = f"FAIL criterion {c.number} ({c.title}): raised before reporting"


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_LINES):
        terminalreporter.write_line(_LINES[n])
