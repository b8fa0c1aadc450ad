import time

import pytest

_RESULTS: list[str] = []
_START = time.perf_counter()
SUITE_RUNTIME_TARGET = 30.0


class _Criterion:
    def __init__(self, number, title):
        self.number, self.title, self.details = number, title, []

    def note(self, text):
        self.details.append(text)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        status = "PASS" if exc_type is None else "FAIL"
        detail = "; ".join(self.details)
        _RESULTS.append(f"[{status}] criterion {self.number}: {self.title}" + (f" -- {detail}" if detail else ""))
        return False


@pytest.fixture
def criterion():
    return _Criterion


def _criterion_key(line):
    label = line.split("criterion ")[1].split(":")[0]
    return (int(label[0]), label)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_RESULTS, key=_criterion_key):
        terminalreporter.write_line(line)
    elapsed = time.perf_counter() - _START
    status = "PASS" if elapsed < SUITE_RUNTIME_TARGET else "FAIL"
    terminalreporter.write_line(
        f"[{status}] criterion 8 (runtime): session took {elapsed:.1f} s, target < {SUITE_RUNTIME_TARGET:.0f} s"
    )
