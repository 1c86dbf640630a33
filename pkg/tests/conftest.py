import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_CRITERIA: list[tuple[str, bool, str]] = []


class CriterionLog:
    """Collects one pass/fail line per acceptance criterion."""

    def __call__(self, name: str, passed: bool, detail: str = ""):
        _CRITERIA.append((name, bool(passed), detail))
        print(f"[criterion {name}] {'PASS' if passed else 'FAIL'} {detail}")
        return passed


@pytest.fixture(scope="session")
def criterion():
    return CriterionLog()


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _CRITERIA:
        terminalreporter.write_line(f"criterion {name:<14} {'PASS' if passed else 'FAIL'}  {detail}")
