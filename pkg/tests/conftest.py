import itertools
import random

import pytest
from hypothesis import strategies as st

from wansync.overlay import graph_from_weights
from wansync.scenario import load_scenario

FIG1_EDGES = [(0, 1, 24), (0, 2, 15), (0, 3, 18), (0, 4, 50),
              (1, 5, 24), (1, 6, 10), (1, 7, 17),
              (2, 8, 20), (2, 13, 12),
              (3, 9, 23), (3, 10, 5), (3, 12, 16),
              (4, 11, 7)]
TRIANGLE = [(0, 1, 1), (1, 2, 1), (0, 2, 2)]


def random_connected_weights(rng: random.Random, n: int, extra: float = 0.5,
                             wmax: int = 9) -> list[tuple[int, int, int]]:
    """Random spanning tree plus a random subset of the remaining pairs."""
    order = list(range(n))
    rng.shuffle(order)
    edges = set()
    for i in range(1, n):
        a, b = order[i], order[rng.randrange(i)]
        edges.add((min(a, b), max(a, b)))
    for a, b in itertools.combinations(range(n), 2):
        if (a, b) not in edges and rng.random() < extra:
            edges.add((a, b))
    return [(a, b, rng.randint(1, wmax)) for a, b in sorted(edges)]


@st.composite
def connected_graphs(draw, min_nodes=2, max_nodes=7, wmax=20):
    n = draw(st.integers(min_nodes, max_nodes))
    seed = draw(st.integers(0, 2**32 - 1))
    extra = draw(st.sampled_from([0.0, 0.3, 0.7, 1.0]))
    return graph_from_weights(n, random_connected_weights(random.Random(seed), n, extra, wmax))


@pytest.fixture
def fig1_graph():
    return graph_from_weights(14, FIG1_EDGES)


@pytest.fixture
def triangle_graph():
    return graph_from_weights(3, TRIANGLE)


@pytest.fixture(scope="session")
def internet2():
    return load_scenario("internet2")
