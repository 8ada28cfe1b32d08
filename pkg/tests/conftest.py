import numpy as np
import pytest
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def record(name: str, ok: bool, detail: str = "") -> None:
    ACCEPTANCE_RESULTS.append((name, bool(ok), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


finite = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False)


@st.composite
def square_matrices(draw, min_n=1, max_n=5):
    n = draw(st.integers(min_n, max_n))
    return draw(hnp.arrays(np.float64, (n, n), elements=finite))


@st.composite
def matrix_pairs(draw, min_n=1, max_n=5):
    n = draw(st.integers(min_n, max_n))
    A = draw(hnp.arrays(np.float64, (n, n), elements=finite))
    B = draw(hnp.arrays(np.float64, (n, n), elements=finite))
    return A, B


@st.composite
def symmetric_matrices(draw, min_n=1, max_n=6):
    A = draw(square_matrices(min_n, max_n))
    return 0.5 * (A + A.T)


@st.composite
def pd_matrices(draw, min_n=1, max_n=6):
    A = draw(square_matrices(min_n, max_n))
    return A.T @ A + 0.5 * np.eye(A.shape[0])
