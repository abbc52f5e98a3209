import numpy as np
import pytest

from steinlab import config


@pytest.fixture(autouse=True)
def bits():
    # tests are written in bits unless they switch explicitly
    with config.use_log_base("2"):
        yield


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


_GATE = pytest.StashKey[list]()


class _Criterion:
    def __init__(self, lines, number, title):
        self.lines, self.number, self.title = lines, number, title
        self.detail = ""

    def __enter__(self):
        return self

    def __exit__(self, kind, exc, tb):
        status = "PASS" if kind is None else "FAIL"
        line = f"criterion {self.number:2d} {status}  {self.title}"
        if self.detail:
            line += f"  [{self.detail}]"
        if exc is not None:
            line += f"  ({str(exc).splitlines()[0] if str(exc) else kind.__name__})"
        self.lines.append((self.number, line))
        print(line)
        return False


@pytest.fixture
def criterion(request):
    lines = request.config.stash.setdefault(_GATE, [])
    return lambda number, title: _Criterion(lines, number, title)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_GATE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
