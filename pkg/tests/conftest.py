import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qcpag import BaseMatrix, Origin, build_cyclic_base, build_prime_base, disperse, use_backend

# the backend fixture only flips a module flag, so reusing it across examples is safe
settings.register_profile("qcpag", deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
settings.load_profile("qcpag")

EX4_ROWS = (1, 118, 56, 79)
EX4_COLS = (2, 83, 33, 46, 36, 94, 42, 86)
EX4_MASK = np.array(
    [
        [1, 0, 1, 0, 1, 1, 1, 1],
        [0, 1, 0, 1, 1, 1, 1, 1],
        [1, 1, 1, 1, 1, 0, 1, 0],
        [1, 1, 1, 1, 0, 1, 0, 1],
    ]
)

# printed parity-check matrix of the 3x3 prime-field example
H3_PRINTED = np.array(
    [
        [1, 0, 0, 1, 0, 0, 1, 0, 0],
        [0, 1, 0, 0, 1, 0, 0, 1, 0],
        [0, 0, 1, 0, 0, 1, 0, 0, 1],
        [1, 0, 0, 0, 1, 0, 0, 0, 1],
        [0, 1, 0, 0, 0, 1, 1, 0, 0],
        [0, 0, 1, 1, 0, 0, 0, 1, 0],
        [1, 0, 0, 0, 0, 1, 0, 1, 0],
        [0, 1, 0, 1, 0, 0, 0, 0, 1],
        [0, 0, 1, 0, 1, 0, 1, 0, 0],
    ],
    dtype=np.uint8,
)

H3_LINES = [
    (0, 3, 6), (1, 4, 7), (2, 5, 8),
    (0, 4, 8), (1, 5, 6), (2, 3, 7),
    (0, 5, 7), (1, 3, 8), (2, 4, 6),
]


def example4_matrix():
    grid = np.outer(EX4_ROWS, EX4_COLS) % 127
    return disperse(BaseMatrix(np.where(EX4_MASK == 1, grid, -1), 127, Origin.MASKED))


@pytest.fixture(params=["numba", "numpy"])
def backend(request):
    with use_backend(request.param):
        yield request.param


@pytest.fixture(scope="session")
def h3():
    return disperse(build_prime_base(3))


@pytest.fixture(scope="session")
def ex4():
    return example4_matrix()


def prime_matrix(p):
    return disperse(build_prime_base(p))


def cyclic_matrix(t, q=None):
    return disperse(build_cyclic_base(q if q is not None else smallest_q(t), t))


def smallest_q(t):
    from qcpag.base import prime_power_base

    q = t + 1
    while prime_power_base(q) is None or (q - 1) % t:
        q += t
    return q


# one (criterion, passed, detail) entry per acceptance check, echoed after the run
ACCEPTANCE: list = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"criterion {num:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
