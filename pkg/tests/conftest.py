import functools

import pytest

from qpcocycle.harness.config import ExperimentConfig
from qpcocycle.harness.suites import build_ledger

ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


def record(criterion: int, title: str, passed: bool, detail: str = "") -> None:
    ACCEPTANCE[criterion] = (title, bool(passed), detail)


@functools.lru_cache(maxsize=None)
def desk_ledger(lam: float = 100.0):
    ledger, ok = build_ledger(ExperimentConfig(), lam)
    assert ok
    return ledger


@pytest.fixture(scope="session")
def desk_cfg():
    return ExperimentConfig()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[k]
        line = f"{'PASS' if ok else 'FAIL'} criterion {k:2d}: {title}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)
