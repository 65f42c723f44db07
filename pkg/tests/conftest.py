from __future__ import annotations

from contextlib import contextmanager

import pytest

_LINES: list[str] = []


class _Recorder:
    @contextmanager
    def __call__(self, number: int, title: str):
        try:
            yield
        except BaseException as exc:
            line = f"[FAIL] criterion {number}: {title} ({type(exc).__name__}: {exc})"
            _LINES.append(line)
            print(line)
            raise
        line = f"[PASS] criterion {number}: {title}"
        _LINES.append(line)
        print(line)


@pytest.fixture
def criterion() -> _Recorder:
    return _Recorder()


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
