import numpy as np
import pytest
from hypothesis import strategies as st

from qlearn.concepts import Concept, ConceptClass, point_functions_plus_zero


@pytest.fixture
def ppz2():
    return point_functions_plus_zero(2)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@st.composite
def concept_classes(draw, max_n=3, min_size=1, max_size=8):
    n = draw(st.integers(1, max_n))
    N = 1 << n
    keys = draw(st.lists(st.integers(0, 2**N - 1), min_size=min_size, max_size=min(max_size, 2**N), unique=True))
    tables = [[(k >> (N - 1 - i)) & 1 for i in range(N)] for k in keys]
    return ConceptClass(n, tuple(Concept(n, t) for t in tables))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
