import pytest

_verdicts = pytest.StashKey[dict]()


@pytest.fixture
def verdict(request):
    """Record one acceptance line, ``verdict(number, passed, detail)``, then assert it."""
    store = request.config.stash.setdefault(_verdicts, {})

    def record(number: int, passed: bool, detail: str):
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        store[number] = line
        print(line)
        assert passed, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(_verdicts, {})
    if store:
        terminalreporter.section("acceptance criteria")
        for number in sorted(store):
            terminalreporter.write_line(store[number])
