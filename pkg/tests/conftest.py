import pytest

_CRITERIA = []


class Criterion:
    """Records one acceptance line; ``check`` asserts after recording."""

    def __init__(self, number, title):
        self.number, self.title = number, title

    def check(self, ok, detail=""):
        status = "PASS" if ok else "FAIL"
        line = f"[{status}] C{self.number:02d} {self.title}: {detail}"
        _CRITERIA.append((self.number, line))
        print(line)
        assert ok, line


@pytest.fixture
def criterion():
    return Criterion


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_CRITERIA):
        terminalreporter.write_line(line)
