import time

import pytest

_CRITERIA: list[str] = []


class Criterion:
    """Records one acceptance line: name, verdict, detail and wall time."""

    def __init__(self, name: str):
        self.name = name
        self.start = time.perf_counter()

    @property
    def elapsed(self) -> float:
        return time.perf_counter() - self.start

    def report(self, passed: bool, detail: str) -> None:
        line = f"[{'PASS' if passed else 'FAIL'}] {self.name}: {detail} ({self.elapsed:.1f}s)"
        _CRITERIA.append(line)
        print(line)


@pytest.fixture
def criterion(request):
    return Criterion(request.node.get_closest_marker("criterion").args[0])


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion reported in the summary")


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
