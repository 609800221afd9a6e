import pytest

from uridensity.rng import RngStream

ACCEPTANCE_LINES: list[str] = []


class ScriptedStream(RngStream):
    """An RngStream whose first words are given explicitly, then falls back to Philox."""

    def __init__(self, words, seed=0):
        super().__init__(seed, 0)
        self._script = list(words)

    def next_u64(self) -> int:
        if self._script:
            self.consumed += 1
            return self._script.pop(0)
        return super().next_u64()


@pytest.fixture
def scripted():
    return ScriptedStream


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
