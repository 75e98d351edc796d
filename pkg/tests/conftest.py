import pytest

from parkspace.accumulate import accumulate
from parkspace.simulate import generate, preset


class Day:
    """A generated scenario together with its accumulator set."""

    def __init__(self, name, **overrides):
        self.scenario = generate(preset(name, **overrides))
        self.frames = self.scenario.frames
        self.gts = self.scenario.gts
        self.acc = accumulate(self.frames, 0.5, grid=self.scenario.grid)


@pytest.fixture(scope="session")
def dense_lot():
    return Day("dense-lot")


@pytest.fixture(scope="session")
def illegal_day():
    return Day("illegal-parking")


@pytest.fixture(scope="session")
def traffic_day():
    return Day("traffic-only")


acceptance_key = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line per criterion; repeated in the terminal summary."""
    lines = request.config.stash.setdefault(acceptance_key, [])

    def report(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        print(line)
        lines.append(line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(acceptance_key, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
