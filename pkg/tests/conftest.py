from __future__ import annotations

import pytest

from valconf.synthetic import write_fixture

# (criterion, passed, detail) lines recorded by the acceptance suite
ACCEPTANCE_LINES: list[tuple[str, bool, str]] = []


def record(criterion: str, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append((criterion, bool(passed), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in ACCEPTANCE_LINES:
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")


@pytest.fixture(scope="session")
def fixture_files(tmp_path_factory):
    return write_fixture(tmp_path_factory.mktemp("fixture"), seed=0)


from hypothesis import settings  # noqa: E402

settings.register_profile("repro", derandomize=True, deadline=None)
settings.load_profile("repro")
