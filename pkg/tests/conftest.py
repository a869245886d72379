import math

import numpy as np
import pytest
from hypothesis import strategies as st


J_HZ = 215.06


def random_density(rng: np.random.Generator, dim: int, rank: int | None = None) -> np.ndarray:
    rank = rank or dim
    a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def random_matrix(rng: np.random.Generator, dim: int) -> np.ndarray:
    return rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))


@st.composite
def densities(draw, dim=2):
    seed = draw(st.integers(0, 2**32 - 1))
    rank = draw(st.integers(1, dim))
    return random_density(np.random.default_rng(seed), dim, rank)


thetas = st.floats(0.0, math.pi, allow_nan=False)
couplings = st.floats(1.0, 500.0, allow_nan=False)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# --- acceptance bookkeeping ----------------------------------------------------------

import time  # noqa: E402

SUITE_BUDGET_S = 60.0
_ACCEPTANCE: list[str] = []
_START = [0.0]


def pytest_sessionstart(session):
    _START[0] = time.perf_counter()


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(n, ok, detail)``."""

    def record(n, ok, detail):
        line = f"criterion {n:>3}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return ok

    return record


def pytest_sessionfinish(session, exitstatus):
    elapsed = time.perf_counter() - _START[0]
    if _ACCEPTANCE:
        full = session.testscollected > 100
        if full:
            ok = elapsed < SUITE_BUDGET_S
            _ACCEPTANCE.append(
                f"criterion 10c: {'PASS' if ok else 'FAIL'}  full suite wall time {elapsed:.1f} s (< {SUITE_BUDGET_S:.0f} s)"
            )
            if not ok:
                session.exitstatus = 1


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
