"""Ready-made graphs: loop clusters, infinite loop bundles, and star families."""

from __future__ import annotations

import math
from typing import Callable

from .graph import Edge, EdgeBundle, Geometric, WeightedGraph, constant_weight_family


def loops_graph(n_loops: int, weight: float, vertex: str = "v") -> WeightedGraph:
    """A single vertex carrying n parallel loops of one weight."""
    edges = [Edge(f"e{i}", vertex, vertex, weight) for i in range(n_loops)]
    return WeightedGraph([vertex], edges)


def bundle_loop_graph(a: float = 2.0, r: float = 2.0, vertex: str = "v") -> WeightedGraph:
    """A single vertex with an infinite loop bundle of weights a, a*r, a*r^2, ..."""
    bundle = EdgeBundle("loop", vertex, vertex, Geometric(a, r))
    return WeightedGraph([vertex], bundles=[bundle])


def constant_bundle_loop_graph(weight: float = math.e, vertex: str = "v") -> WeightedGraph:
    """A single vertex with infinitely many loops of equal weight.

    The loop series diverges at every beta, so no admissible trace exists at
    any finite inverse temperature; the one ground state remains.
    """
    bundle = EdgeBundle("loop", vertex, vertex, constant_weight_family(weight))
    return WeightedGraph([vertex], bundles=[bundle])


def truncated_star_graph(
    n_sources: int, weight_fn: Callable[[int], float]
) -> WeightedGraph:
    """Sources v1..vN each feeding the center v0 through one weighted edge."""
    if n_sources < 1:
        raise ValueError("a star needs at least one source")
    vertices = ["v0"] + [f"v{n}" for n in range(1, n_sources + 1)]
    edges = [
        Edge(f"e{n}", f"v{n}", "v0", float(weight_fn(n)))
        for n in range(1, n_sources + 1)
    ]
    return WeightedGraph(vertices, edges)


def bundled_star_graph(
    n_sources: int,
    weight_fn: Callable[[int], float],
    tail_a: float,
    tail_r: float,
    tail_vertex: str = "tail",
) -> WeightedGraph:
    """A truncated star plus a geometric bundle standing in for the missing tail.

    The bundle makes the center an infinite receiver, so every vertex of this
    graph is singular, matching the infinite star it models.
    """
    base = truncated_star_graph(n_sources, weight_fn)
    vertices = list(base.vertices) + [tail_vertex]
    bundle = EdgeBundle("tail_edges", tail_vertex, "v0", Geometric(tail_a, tail_r))
    return WeightedGraph(vertices, base.edges, [bundle], weight_floor=base.weight_floor)
