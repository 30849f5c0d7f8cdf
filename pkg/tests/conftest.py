import random

import pytest

import graphkms as gk


def build_two_vertex() -> gk.WeightedGraph:
    """v0 carries a loop of weight 2 and receives weight 3 from the source v1."""
    edges = [gk.Edge("loop", "v0", "v0", 2.0), gk.Edge("in", "v1", "v0", 3.0)]
    return gk.WeightedGraph(["v0", "v1"], edges)


def build_pair_graph() -> gk.WeightedGraph:
    """Two vertices with parallel edges e, f: u -> v, a return edge and a loop."""
    edges = [
        gk.Edge("e", "u", "v", 2.0),
        gk.Edge("f", "u", "v", 3.0),
        gk.Edge("h", "v", "u", 2.5),
        gk.Edge("l", "u", "u", 1.5),
    ]
    return gk.WeightedGraph(["u", "v"], edges)


def build_rich4() -> gk.WeightedGraph:
    """Strongly connected 4-vertex fixture: a loop plus a 4-cycle, seeded weights."""
    rng = random.Random(711)

    def w() -> float:
        return round(rng.uniform(1.1, 3.9), 6)

    edges = [
        gk.Edge("aa", "a", "a", w()),
        gk.Edge("ab", "a", "b", w()),
        gk.Edge("bc", "b", "c", w()),
        gk.Edge("cd", "c", "d", w()),
        gk.Edge("da", "d", "a", w()),
    ]
    return gk.WeightedGraph(["a", "b", "c", "d"], edges)


def random_graph(rng: random.Random, max_vertices: int = 4, max_edges: int = 6) -> gk.WeightedGraph:
    """Random multigraph with weights in (1, 4], sized for brute-force oracles."""
    n_vertices = rng.randint(1, max_vertices)
    vertices = [f"v{i}" for i in range(n_vertices)]
    n_edges = rng.randint(0, max_edges)
    edges = []
    for j in range(n_edges):
        weight = min(4.0, rng.uniform(1.0, 4.0) + 1e-6)
        edges.append(gk.Edge(f"e{j}", rng.choice(vertices), rng.choice(vertices), weight))
    return gk.WeightedGraph(vertices, edges)


@pytest.fixture(scope="session")
def two_vertex() -> gk.WeightedGraph:
    return build_two_vertex()


@pytest.fixture(scope="session")
def two_vertex_tau() -> gk.Trace:
    return gk.Trace({"v0": 0.4, "v1": 0.6})


@pytest.fixture(scope="session")
def pair_graph() -> gk.WeightedGraph:
    return build_pair_graph()


@pytest.fixture(scope="session")
def three_loop() -> gk.WeightedGraph:
    return gk.loops_graph(3, 2.0)


@pytest.fixture(scope="session")
def o_inf() -> gk.WeightedGraph:
    return gk.bundle_loop_graph(2.0, 2.0)


@pytest.fixture(scope="session")
def rich4() -> gk.WeightedGraph:
    return build_rich4()


@pytest.fixture(scope="session")
def rich4_state(rich4) -> tuple[float, gk.Trace]:
    beta = gk.critical_beta(rich4, tol=1e-12)
    report = gk.solve(rich4, beta)
    assert report.feasible
    return beta, report.witness
