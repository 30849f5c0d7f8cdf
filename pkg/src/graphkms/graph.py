"""Weighted directed multigraphs with infinite edge bundles, and their paths.

Edges are directed: an edge ``e`` runs from its source vertex ``src`` to its
range vertex ``dst``, and carries a weight ``> weight_floor``.  Infinitely many
parallel edges between two vertices are modeled by an :class:`EdgeBundle`
whose weight sequence is known in closed form; bundle members never appear in
numeric path computations, only their summed series values do.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable

from .errors import (
    CompositionError,
    InfiniteEnumerationError,
    InputError,
    UnsupportedPathError,
)

DEFAULT_WEIGHT_FLOOR = 1e-9

# ids appear in path renderings separated by "." and in brackets, so keep
# those characters out of the id alphabet
_ID_RE = re.compile(r"^[A-Za-z0-9_:-]+$")

_BUNDLE_MEMBER_RE = re.compile(r"^(?P<bundle>.+):(?P<index>\d+)$")


@dataclass(frozen=True)
class Edge:
    id: str
    src: str
    dst: str
    weight: float


@dataclass(frozen=True)
class Geometric:
    """Weight family a, a*r, a*r^2, ... with a > 1 and ratio r > 1."""

    a: float
    r: float

    def member_weight(self, n: int) -> float:
        return self.a * self.r**n

    @property
    def min_weight(self) -> float:
        return self.a

    def series(self, beta: float) -> float:
        """Sum of w^-beta over the family; finite for every beta > 0."""
        q = self.r**-beta
        return self.a**-beta / (1.0 - q)


@dataclass(frozen=True)
class ExplicitTail:
    """Finitely many explicit weights followed by a closed-form tail.

    ``tail_sum`` maps beta to the sum of w^-beta over the tail and may return
    ``math.inf`` for a divergent tail.  ``tail_min`` is the infimum of the
    tail weights; it is what the weight-floor checks see.
    """

    head: tuple[float, ...]
    tail_sum: Callable[[float], float]
    tail_min: float

    @property
    def min_weight(self) -> float:
        return min(self.head) if self.head else self.tail_min

    def series(self, beta: float) -> float:
        return sum(w**-beta for w in self.head) + self.tail_sum(beta)


def constant_weight_family(weight: float) -> ExplicitTail:
    """Infinitely many edges of one weight; the series diverges for every beta."""
    return ExplicitTail(head=(), tail_sum=lambda beta: math.inf, tail_min=weight)


@dataclass(frozen=True)
class EdgeBundle:
    id: str
    src: str
    dst: str
    family: Geometric | ExplicitTail

    def series(self, beta: float) -> float:
        return self.family.series(beta)

    @property
    def min_weight(self) -> float:
        return self.family.min_weight


class VertexKind(Enum):
    SOURCE = "source"
    REGULAR = "regular"
    INFINITE_RECEIVER = "infinite_receiver"


@dataclass(frozen=True)
class VertexClass:
    kind: VertexKind
    in_degree: int = 0

    @property
    def is_singular(self) -> bool:
        return self.kind is not VertexKind.REGULAR


@dataclass(frozen=True)
class Path:
    """A composable edge sequence, or a single vertex for length 0.

    Edges are listed range-first: the range of the whole path is the range of
    the first edge, the source is the source of the last edge, and consecutive
    entries satisfy range(next) == source(previous).  ``weight`` is the product
    of the edge weights (1.0 for a vertex) and is ``None`` when the path passes
    through a bundle member, whose weight is never used numerically.
    """

    edges: tuple[str, ...]
    range_v: str
    source_v: str
    weight: float | None = field(compare=False, default=None)

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def is_vertex(self) -> bool:
        return not self.edges

    @staticmethod
    def at_vertex(v: str) -> "Path":
        return Path((), v, v, 1.0)


class WeightedGraph:
    """Immutable directed multigraph with weighted edges and edge bundles."""

    def __init__(
        self,
        vertices: Iterable[str],
        edges: Iterable[Edge] = (),
        bundles: Iterable[EdgeBundle] = (),
        weight_floor: float = DEFAULT_WEIGHT_FLOOR,
    ):
        self._vertices = tuple(vertices)
        self._edges = tuple(edges)
        self._bundles = tuple(bundles)
        self._weight_floor = float(weight_floor)
        self._validate()
        self._edge_by_id = {e.id: e for e in self._edges}
        self._bundle_by_id = {b.id: b for b in self._bundles}
        in_edges: dict[str, list[Edge]] = {v: [] for v in self._vertices}
        in_bundles: dict[str, list[EdgeBundle]] = {v: [] for v in self._vertices}
        for e in self._edges:
            in_edges[e.dst].append(e)
        for b in self._bundles:
            in_bundles[b.dst].append(b)
        self._in_edges = {v: tuple(es) for v, es in in_edges.items()}
        self._in_bundles = {v: tuple(bs) for v, bs in in_bundles.items()}

    def _validate(self) -> None:
        if not self._vertices:
            raise InputError("graph must declare at least one vertex")
        seen_v: set[str] = set()
        for v in self._vertices:
            if not _ID_RE.match(v):
                raise InputError(f"invalid vertex id {v!r}")
            if v in seen_v:
                raise InputError(f"duplicate vertex id {v!r}")
            seen_v.add(v)
        floor = self._weight_floor
        if not floor > 0:
            raise InputError("weight_floor must be positive")
        seen_ids: set[str] = set()
        for e in self._edges:
            if not _ID_RE.match(e.id):
                raise InputError(f"invalid edge id {e.id!r}")
            if e.id in seen_ids:
                raise InputError(f"duplicate edge id {e.id!r}")
            seen_ids.add(e.id)
            if e.src not in seen_v or e.dst not in seen_v:
                raise InputError(f"edge {e.id!r} references an undeclared vertex")
            if not (math.isfinite(e.weight) and e.weight > floor):
                raise InputError(
                    f"edge {e.id!r} weight {e.weight} must exceed the floor {floor}"
                )
        for b in self._bundles:
            if not _ID_RE.match(b.id):
                raise InputError(f"invalid bundle id {b.id!r}")
            if b.id in seen_ids:
                raise InputError(f"duplicate edge id {b.id!r}")
            seen_ids.add(b.id)
            if b.src not in seen_v or b.dst not in seen_v:
                raise InputError(f"bundle {b.id!r} references an undeclared vertex")
            fam = b.family
            if isinstance(fam, Geometric):
                if not (fam.a > 1.0 and fam.r > 1.0):
                    raise InputError(
                        f"bundle {b.id!r}: geometric family needs a > 1 and r > 1"
                    )
            elif isinstance(fam, ExplicitTail):
                if not fam.tail_min > floor:
                    raise InputError(
                        f"bundle {b.id!r}: tail weights must exceed the floor {floor}"
                    )
                for w in fam.head:
                    if not (math.isfinite(w) and w > floor):
                        raise InputError(
                            f"bundle {b.id!r}: head weight {w} below the floor {floor}"
                        )
            else:
                raise InputError(f"bundle {b.id!r}: unknown family {fam!r}")
            if fam.min_weight <= floor:
                raise InputError(
                    f"bundle {b.id!r}: weights must exceed the floor {floor}"
                )

    @property
    def vertices(self) -> tuple[str, ...]:
        return self._vertices

    @property
    def edges(self) -> tuple[Edge, ...]:
        return self._edges

    @property
    def bundles(self) -> tuple[EdgeBundle, ...]:
        return self._bundles

    @property
    def weight_floor(self) -> float:
        return self._weight_floor

    def has_vertex(self, v: str) -> bool:
        return v in self._in_edges

    def require_vertex(self, v: str) -> None:
        if not self.has_vertex(v):
            raise InputError(f"unknown vertex id {v!r}")

    def edges_into(self, v: str) -> tuple[Edge, ...]:
        self.require_vertex(v)
        return self._in_edges[v]

    def bundles_into(self, v: str) -> tuple[EdgeBundle, ...]:
        self.require_vertex(v)
        return self._in_bundles[v]

    def edge(self, edge_id: str) -> Edge:
        try:
            return self._edge_by_id[edge_id]
        except KeyError:
            raise InputError(f"unknown edge id {edge_id!r}") from None

    def resolve_ref(self, ref: str) -> tuple[str, str, float | None]:
        """Resolve an edge reference to (src, dst, weight).

        A plain id names a finite edge.  ``bundleid:n`` names member ``n`` of a
        bundle; its weight is reported as ``None`` because bundle members only
        ever enter computations through series values.
        """
        e = self._edge_by_id.get(ref)
        if e is not None:
            return e.src, e.dst, e.weight
        m = _BUNDLE_MEMBER_RE.match(ref)
        if m:
            b = self._bundle_by_id.get(m.group("bundle"))
            if b is not None:
                return b.src, b.dst, None
        raise InputError(f"unknown edge reference {ref!r}")

    def min_weight(self) -> float:
        """Smallest weight over all edges and bundle families."""
        candidates = [e.weight for e in self._edges]
        candidates += [b.min_weight for b in self._bundles]
        return min(candidates) if candidates else math.inf

    def all_weights_above_one(self) -> bool:
        return self.min_weight() > 1.0


def vertex_class(g: WeightedGraph, v: str) -> VertexClass:
    """Classify v as a source, an infinite receiver, or regular with its in-degree."""
    g.require_vertex(v)
    if g.bundles_into(v):
        return VertexClass(VertexKind.INFINITE_RECEIVER)
    n = len(g.edges_into(v))
    if n == 0:
        return VertexClass(VertexKind.SOURCE)
    return VertexClass(VertexKind.REGULAR, in_degree=n)


def is_singular(g: WeightedGraph, v: str) -> bool:
    return vertex_class(g, v).is_singular


def make_path(g: WeightedGraph, edge_refs: Iterable[str]) -> Path:
    """Build and validate a path from edge references, range-first order."""
    refs = tuple(edge_refs)
    if not refs:
        raise InputError("a path needs at least one edge; use Path.at_vertex for vertices")
    resolved = [g.resolve_ref(r) for r in refs]
    for i in range(len(resolved) - 1):
        # range of the later edge must equal the source of the earlier one
        if resolved[i + 1][1] != resolved[i][0]:
            raise CompositionError(
                f"edges {refs[i]!r} and {refs[i + 1]!r} do not compose"
            )
    weight: float | None = 1.0
    for _, _, w in resolved:
        weight = None if (weight is None or w is None) else weight * w
    return Path(refs, range_v=resolved[0][1], source_v=resolved[-1][0], weight=weight)


def edge_path(e: Edge) -> Path:
    return Path((e.id,), range_v=e.dst, source_v=e.src, weight=e.weight)


def path_weight(g: WeightedGraph, mu: Path) -> float:
    """Product of the edge weights along mu; 1 for a vertex path."""
    weight = 1.0
    for ref in mu.edges:
        _, _, w = g.resolve_ref(ref)
        if w is None:
            raise UnsupportedPathError(
                f"path {mu.edges} passes through bundle member {ref!r}"
            )
        weight *= w
    return weight


def concat(mu: Path, nu: Path) -> Path:
    """Concatenate paths: mu then nu, defined when source(mu) == range(nu)."""
    if mu.source_v != nu.range_v:
        raise CompositionError(
            f"cannot compose: source {mu.source_v!r} != range {nu.range_v!r}"
        )
    if mu.is_vertex:
        return nu
    if nu.is_vertex:
        return mu
    weight = None if (mu.weight is None or nu.weight is None) else mu.weight * nu.weight
    return Path(mu.edges + nu.edges, mu.range_v, nu.source_v, weight)


def strip_prefix(prefix: Path, whole: Path) -> Path | None:
    """Return rest with whole == concat(prefix, rest), or None if not a prefix."""
    k = len(prefix.edges)
    if k == 0:
        return whole if whole.range_v == prefix.range_v else None
    if len(whole.edges) < k or whole.edges[:k] != prefix.edges:
        return None
    if len(whole.edges) == k:
        return Path.at_vertex(whole.source_v)
    rest_weight: float | None
    if whole.weight is None or prefix.weight is None:
        rest_weight = None
    else:
        rest_weight = whole.weight / prefix.weight
    return Path(whole.edges[k:], prefix.source_v, whole.source_v, rest_weight)


def paths_into(g: WeightedGraph, v: str, n: int) -> list[Path]:
    """All paths of length n whose range is v, in declaration order."""
    g.require_vertex(v)
    if n < 0:
        raise InputError("path length must be nonnegative")
    if n == 0:
        return [Path.at_vertex(v)]
    if g.bundles_into(v):
        raise InfiniteEnumerationError(
            f"vertex {v!r} receives an edge bundle; its preimage is infinite"
        )
    out: list[Path] = []
    for e in g.edges_into(v):
        for tail in paths_into(g, e.src, n - 1):
            out.append(concat(edge_path(e), tail))
    return out


def enumerate_paths(g: WeightedGraph, max_length: int) -> list[Path]:
    """All paths of length 0..max_length over the whole graph."""
    out = [Path.at_vertex(v) for v in g.vertices]
    for n in range(1, max_length + 1):
        for v in g.vertices:
            out.extend(paths_into(g, v, n))
    return out


# ---------------------------------------------------------------------------
# Graph files


def _family_from_dict(bundle_id: str, family: str, params: dict) -> Geometric | ExplicitTail:
    if family == "geometric":
        try:
            return Geometric(a=float(params["a"]), r=float(params["r"]))
        except KeyError as exc:
            raise InputError(f"bundle {bundle_id!r}: geometric needs params a and r") from exc
    if family == "constant":
        try:
            return constant_weight_family(float(params["weight"]))
        except KeyError as exc:
            raise InputError(f"bundle {bundle_id!r}: constant needs params.weight") from exc
    raise InputError(f"bundle {bundle_id!r}: unknown family {family!r}")


def graph_from_dict(
    data: dict,
    weight_floor: float = DEFAULT_WEIGHT_FLOOR,
    require_weights_above_one: bool = False,
) -> WeightedGraph:
    """Build a graph from the JSON file structure (vertices/edges/bundles)."""
    if not isinstance(data, dict):
        raise InputError("graph file must contain a JSON object")
    vertices = data.get("vertices")
    if not isinstance(vertices, list) or not all(isinstance(v, str) for v in vertices):
        raise InputError("graph file needs a 'vertices' list of strings")
    edges = []
    for raw in data.get("edges", []):
        try:
            edges.append(
                Edge(
                    id=str(raw["id"]),
                    src=str(raw["src"]),
                    dst=str(raw["dst"]),
                    weight=float(raw["weight"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed edge entry {raw!r}") from exc
    bundles = []
    for raw in data.get("bundles", []):
        try:
            bundles.append(
                EdgeBundle(
                    id=str(raw["id"]),
                    src=str(raw["src"]),
                    dst=str(raw["dst"]),
                    family=_family_from_dict(
                        str(raw.get("id")), str(raw["family"]), raw.get("params", {})
                    ),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed bundle entry {raw!r}") from exc
    floor = max(weight_floor, 1.0) if require_weights_above_one else weight_floor
    return WeightedGraph(vertices, edges, bundles, weight_floor=floor)


def load_graph(
    path: str,
    weight_floor: float = DEFAULT_WEIGHT_FLOOR,
    require_weights_above_one: bool = False,
) -> WeightedGraph:
    """Load a graph from a JSON file; see graph_from_dict for the schema."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return graph_from_dict(
        data,
        weight_floor=weight_floor,
        require_weights_above_one=require_weights_above_one,
    )
