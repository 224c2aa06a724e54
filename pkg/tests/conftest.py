import random

import pytest
from hypothesis import HealthCheck, settings

from ncqh import structures as st
from ncqh.ncalg import PathAlgebra, parse_element
from ncqh.quiver_core import BASIC, LOOP, QuiverPresentation

settings.register_profile(
    "ncqh",
    derandomize=True,
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ncqh")

TWO_ARROW = {
    "chain": QuiverPresentation.build([1, 2, 3], [("a", 1, 2), ("b", 2, 3)]),
    "parallel": QuiverPresentation.build([1, 2], [("a", 1, 2), ("b", 1, 2)]),
    "loop_and_arrow": QuiverPresentation.build([1, 2], [("a", 1, 1), ("b", 1, 2)]),
    "two_loops": QuiverPresentation.build([1], [("a", 1, 1), ("b", 1, 1)]),
}


def random_two_arrow_quiver(seed: int) -> QuiverPresentation:
    """A seeded random connected quiver with two arrows on at most three vertices."""
    rng = random.Random(seed)
    n = rng.randint(1, 3)
    verts = list(range(1, n + 1))
    while True:
        arrows = [("a", rng.choice(verts), rng.choice(verts)), ("b", rng.choice(verts), rng.choice(verts))]
        touched = {v for _, t, h in arrows for v in (t, h)}
        if touched == set(verts):
            return QuiverPresentation.build(verts, arrows)


@pytest.fixture(scope="session")
def basic_alg():
    return PathAlgebra(BASIC)


@pytest.fixture(scope="session")
def loop_alg():
    return PathAlgebra(LOOP)


@pytest.fixture(scope="session")
def basic_qp():
    return st.quiver_qp(BASIC)


@pytest.fixture(scope="session")
def loop_qp():
    return st.quiver_qp(LOOP)


@pytest.fixture(scope="session")
def basic_qb(basic_qp):
    return st.omega_from_P(basic_qp)


@pytest.fixture(scope="session")
def loop_qb(loop_qp):
    return st.omega_from_P(loop_qp)


@pytest.fixture
def el(basic_alg):
    return lambda text: parse_element(basic_alg, text)
