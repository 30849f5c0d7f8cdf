"""Vertex traces, the weighted transfer functional, and the induced functionals.

A trace assigns nonnegative mass to each vertex.  The transfer functional at
inverse temperature beta maps a trace tau to

    v  ->  sum over edges e into v of  w(e)^-beta * tau[source(e)]

with edge bundles contributing their closed-form series; a divergent series
with positive upstream mass makes the value +inf (a sentinel, not an error).
The fixed-point equality of this map at finitely-receiving vertices and the
subinvariance inequality everywhere characterize the traces that extend to
KMS states; ground states instead come from traces supported on singular
vertices.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .algebra import AlgebraElement
from .errors import InputError, UnsupportedPathError
from .graph import VertexKind, WeightedGraph, paths_into, vertex_class

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class Trace:
    """Nonnegative vertex masses; vertices missing from the map carry mass 0."""

    values: dict[str, float]

    def __post_init__(self):
        for v, m in self.values.items():
            if not (math.isfinite(m) and m >= 0.0):
                raise InputError(f"trace mass at {v!r} must be finite and >= 0, got {m}")

    @staticmethod
    def state(values: dict[str, float], tol: float = DEFAULT_TOL) -> "Trace":
        """A trace validated to have total mass 1 (a state on the vertex algebra)."""
        t = Trace(dict(values))
        if abs(t.mass - 1.0) > tol:
            raise InputError(f"state must have total mass 1, got {t.mass}")
        return t

    @staticmethod
    def point(v: str) -> "Trace":
        return Trace({v: 1.0})

    @staticmethod
    def uniform(g: WeightedGraph) -> "Trace":
        n = len(g.vertices)
        return Trace({v: 1.0 / n for v in g.vertices})

    @property
    def mass(self) -> float:
        return sum(self.values.values())

    def value(self, v: str) -> float:
        return self.values.get(v, 0.0)

    def normalized(self) -> "Trace":
        m = self.mass
        if m <= 0.0:
            raise InputError("cannot normalize a trace with zero mass")
        return Trace({v: x / m for v, x in self.values.items()})

    def to_dict(self) -> dict[str, float]:
        return dict(self.values)


def _require_beta(beta: float) -> None:
    if not (math.isfinite(beta) and beta > 0.0):
        raise InputError(f"inverse temperature must be positive, got {beta}")


def transfer(g: WeightedGraph, tau: Trace, beta: float, v: str) -> float:
    """Transfer value at v: weighted sum of tau over in-edges, +inf on divergence.

    Sources give 0; bundle series are evaluated in closed form, and a
    divergent series contributes nothing when its source carries zero mass.
    """
    _require_beta(beta)
    g.require_vertex(v)
    total = 0.0
    for e in g.edges_into(v):
        total += e.weight**-beta * tau.value(e.src)
    for b in g.bundles_into(v):
        mass = tau.value(b.src)
        if mass == 0.0:
            continue
        total += b.series(beta) * mass
    return total


def n_step_transfer(g: WeightedGraph, tau: Trace, beta: float, v: str, n: int) -> float:
    """Sum of w(mu)^-beta * tau[source(mu)] over all length-n paths into v.

    Computed by brute-force path enumeration; n = 1 falls back to transfer()
    so single-step bundle series are still covered.
    """
    if n < 1:
        raise InputError("step count must be a positive integer")
    if n == 1:
        return transfer(g, tau, beta, v)
    _require_beta(beta)
    total = 0.0
    for p in paths_into(g, v, n):
        total += p.weight**-beta * tau.value(p.source_v)
    return total


@dataclass(frozen=True)
class KmsFunctional:
    """Candidate equilibrium functional determined by a trace and beta.

    On a monomial it evaluates to [mu == nu] * w(mu)^-beta * tau[source(mu)]
    and extends linearly.  It is defined for any trace; only traces passing
    check_k1/check_k2 are guaranteed to extend to a state.
    """

    graph: WeightedGraph
    tau: Trace
    beta: float

    def __post_init__(self):
        _require_beta(self.beta)

    def eval(self, x: AlgebraElement) -> complex:
        return phi_eval(self, x)


def phi_eval(f: KmsFunctional, x: AlgebraElement) -> complex:
    total = 0j
    for (mu, nu), c in x.terms.items():
        if mu != nu:
            continue
        if mu.weight is None:
            raise UnsupportedPathError(
                f"cannot evaluate on bundle-member path {mu.edges}"
            )
        total += c * mu.weight**-f.beta * f.tau.value(mu.source_v)
    return total


@dataclass(frozen=True)
class GroundFunctional:
    """Functional from a trace supported on singular vertices.

    Evaluates to tau[v] on vertex projections and to 0 on every monomial with
    a nonempty path part.
    """

    graph: WeightedGraph
    tau: Trace

    def __post_init__(self):
        for v, mass in self.tau.values.items():
            if mass > 0.0 and not vertex_class(self.graph, v).is_singular:
                raise InputError(
                    f"ground trace puts mass {mass} on non-singular vertex {v!r}"
                )

    def eval(self, x: AlgebraElement) -> complex:
        return ground_eval(self, x)


def ground_eval(gf: GroundFunctional, x: AlgebraElement) -> complex:
    total = 0j
    for (mu, nu), c in x.terms.items():
        if mu.is_vertex and nu.is_vertex:
            total += c * gf.tau.value(mu.source_v)
    return total


# ---------------------------------------------------------------------------
# Condition checks


@dataclass(frozen=True)
class VertexCheck:
    vertex: str
    lhs: float
    rhs: float
    residual: float
    ok: bool

    def to_dict(self) -> dict:
        return {
            "vertex": self.vertex,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "residual": self.residual,
            "pass": self.ok,
        }


@dataclass(frozen=True)
class ConditionReport:
    condition: str
    rows: tuple[VertexCheck, ...]
    tol: float

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows)

    @property
    def violations(self) -> tuple[VertexCheck, ...]:
        return tuple(r for r in self.rows if not r.ok)

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "tol": self.tol,
            "pass": self.ok,
            "rows": [r.to_dict() for r in self.rows],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def check_k1(
    g: WeightedGraph, tau: Trace, beta: float, tol: float = DEFAULT_TOL
) -> ConditionReport:
    """Fixed-point equality of the transfer value at every regular vertex."""
    _require_beta(beta)
    rows = []
    for v in g.vertices:
        if vertex_class(g, v).kind is not VertexKind.REGULAR:
            continue
        lhs = transfer(g, tau, beta, v)
        rhs = tau.value(v)
        residual = abs(lhs - rhs)
        rows.append(VertexCheck(v, lhs, rhs, residual, residual <= tol))
    return ConditionReport("K1", tuple(rows), tol)


def check_k2(
    g: WeightedGraph, tau: Trace, beta: float, tol: float = DEFAULT_TOL
) -> ConditionReport:
    """Subinvariance: the transfer value never exceeds the trace, at any vertex."""
    _require_beta(beta)
    rows = []
    for v in g.vertices:
        lhs = transfer(g, tau, beta, v)
        rhs = tau.value(v)
        excess = lhs - rhs
        ok = lhs <= rhs + tol
        rows.append(VertexCheck(v, lhs, rhs, max(0.0, excess), ok))
    return ConditionReport("K2", tuple(rows), tol)
