import time

import numpy as np
import pytest

SUITE_BUDGET_S = 60.0

# (criterion id, description, passed, detail) appended by test_acceptance
ACCEPTANCE_LINES: list[tuple[str, str, bool, str]] = []
_START = {}


def random_hermitian(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * (m + m.conj().T) / 2


def random_state(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


def pytest_sessionstart(session):
    _START["t"] = time.perf_counter()


def pytest_sessionfinish(session, exitstatus):
    elapsed = time.perf_counter() - _START.get("t", time.perf_counter())
    if not ACCEPTANCE_LINES:
        return
    ok = elapsed < SUITE_BUDGET_S
    ACCEPTANCE_LINES.append(
        ("10b", f"suite runtime < {SUITE_BUDGET_S:.0f} s", ok, f"{elapsed:.1f} s")
    )
    if not ok and session.exitstatus == 0:
        session.exitstatus = 1


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for cid, desc, passed, detail in ACCEPTANCE_LINES:
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {cid:>3}  {desc}: {detail}")
