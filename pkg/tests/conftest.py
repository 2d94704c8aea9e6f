import pytest

_RESULTS: dict[int, tuple[bool, str]] = {}


class AcceptanceLog:
    def record(self, number: int, passed: bool, detail: str) -> None:
        _RESULTS[number] = (bool(passed), detail)
        print(f"\n{format_line(number, passed, detail)}")


def format_line(number: int, passed: bool, detail: str) -> str:
    return f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}"


@pytest.fixture(scope="session")
def acceptance():
    return AcceptanceLog()


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        passed, detail = _RESULTS[number]
        terminalreporter.write_line(format_line(number, passed, detail))
