import numpy as np
import pytest
from hypothesis import settings, strategies as st

from spinc_immersion.clifford import Multivector

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def random_mv(rng: np.random.Generator, m: int) -> Multivector:
    return Multivector(rng.normal(size=1 << m) + 1j * rng.normal(size=1 << m))


def random_rotation(rng: np.random.Generator, m: int) -> np.ndarray:
    Q, R = np.linalg.qr(rng.normal(size=(m, m)))
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] *= -1
    return Q


@st.composite
def multivectors(draw, m: int | None = None, min_m: int = 1, max_m: int = 5):
    m = draw(st.integers(min_m, max_m)) if m is None else m
    elems = st.floats(-2, 2, allow_nan=False, allow_infinity=False)
    re = draw(st.lists(elems, min_size=1 << m, max_size=1 << m))
    im = draw(st.lists(elems, min_size=1 << m, max_size=1 << m))
    return Multivector(np.array(re) + 1j * np.array(im))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance_line(request):
    """Record one PASS/FAIL line per acceptance criterion for the terminal summary."""
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, [])

    def record(label: str, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        lines.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
