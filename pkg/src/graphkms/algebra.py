"""Symbolic *-algebra of finite complex combinations of monomials s_mu s_nu*.

A monomial is a pair of paths (mu, nu) with a common source vertex and stands
for the partial isometry s_mu s_nu*; the vertex projection p_v is the monomial
with mu = nu = the vertex path at v.  Products follow the prefix-matching
calculus

    (s_mu s_nu*)(s_al s_be*) = s_{mu a'} s_be*   if al = nu a'
                             = s_mu s_{be n'}*   if nu = al n'
                             = 0                 otherwise

and every other operation extends termwise from monomials.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator

from .errors import (
    DecompositionError,
    InputError,
    NotExpandableError,
    UnsupportedPathError,
)
from .graph import (
    Path,
    VertexKind,
    WeightedGraph,
    concat,
    edge_path,
    make_path,
    strip_prefix,
    vertex_class,
)

Key = tuple[Path, Path]


@dataclass(frozen=True)
class Monomial:
    mu: Path
    nu: Path

    def __post_init__(self):
        if self.mu.source_v != self.nu.source_v:
            raise InputError(
                f"monomial paths must share a source: {self.mu.source_v!r} != {self.nu.source_v!r}"
            )

    @property
    def key(self) -> Key:
        return (self.mu, self.nu)

    @property
    def is_diagonal(self) -> bool:
        return len(self.mu) == len(self.nu)


class AlgebraElement:
    """Finite complex-linear combination of monomials, keyed by (mu, nu).

    The term map is the normal form; exact-zero coefficients are never stored.
    Instances are treated as immutable values.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: dict[Key, complex] | None = None):
        clean: dict[Key, complex] = {}
        if terms:
            for key, coeff in terms.items():
                c = complex(coeff)
                if c != 0:
                    clean[key] = c
        self.terms = clean

    @staticmethod
    def zero() -> "AlgebraElement":
        return AlgebraElement()

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def items(self) -> Iterator[tuple[Key, complex]]:
        return iter(self.terms.items())

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return self.terms == other.terms

    __hash__ = None  # type: ignore[assignment]

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        return elem_add(self, other)

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        return elem_add(self, scalar_mul(-1.0, other))

    def __neg__(self) -> "AlgebraElement":
        return scalar_mul(-1.0, self)

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return elem_mul(self, other)
        if isinstance(other, (int, float, complex)):
            return scalar_mul(other, self)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex)):
            return scalar_mul(other, self)
        return NotImplemented

    def __repr__(self) -> str:
        from .render import render_element

        return f"<AlgebraElement {render_element(self)}>"


def monomial_element(m: Monomial, coeff: complex = 1.0) -> AlgebraElement:
    return AlgebraElement({m.key: coeff})


def vertex_projection(v: str) -> AlgebraElement:
    p = Path.at_vertex(v)
    return AlgebraElement({(p, p): 1.0})


def isometry(g: WeightedGraph, edge_refs: Iterable[str] | str) -> AlgebraElement:
    """s_mu for the path with the given edge references."""
    refs = (edge_refs,) if isinstance(edge_refs, str) else tuple(edge_refs)
    mu = make_path(g, refs)
    return AlgebraElement({(mu, Path.at_vertex(mu.source_v)): 1.0})


def co_isometry(g: WeightedGraph, edge_refs: Iterable[str] | str) -> AlgebraElement:
    """s_mu* for the path with the given edge references."""
    return adjoint(isometry(g, edge_refs))


def _mul_key(k1: Key, k2: Key) -> Key | None:
    mu1, nu1 = k1
    mu2, nu2 = k2
    rest = strip_prefix(nu1, mu2)
    if rest is not None:
        return (concat(mu1, rest), nu2)
    rest = strip_prefix(mu2, nu1)
    if rest is not None:
        return (mu1, concat(nu2, rest))
    return None


def mono_mul(x: Monomial, y: Monomial) -> AlgebraElement:
    """Product of two monomials; at most one term, coefficient 1."""
    key = _mul_key(x.key, y.key)
    if key is None:
        return AlgebraElement()
    return AlgebraElement({key: 1.0})


def elem_add(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    out = dict(x.terms)
    for key, c in y.terms.items():
        acc = out.get(key, 0j) + c
        if acc == 0:
            out.pop(key, None)
        else:
            out[key] = acc
    result = AlgebraElement.__new__(AlgebraElement)
    result.terms = out
    return result


def scalar_mul(lam: complex, x: AlgebraElement) -> AlgebraElement:
    lam = complex(lam)
    if lam == 0:
        return AlgebraElement()
    result = AlgebraElement.__new__(AlgebraElement)
    result.terms = {key: lam * c for key, c in x.terms.items()}
    return result


def elem_mul(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    out: dict[Key, complex] = {}
    for k1, c1 in x.terms.items():
        for k2, c2 in y.terms.items():
            key = _mul_key(k1, k2)
            if key is None:
                continue
            acc = out.get(key, 0j) + c1 * c2
            if acc == 0:
                out.pop(key, None)
            else:
                out[key] = acc
    result = AlgebraElement.__new__(AlgebraElement)
    result.terms = out
    return result


def adjoint(x: AlgebraElement) -> AlgebraElement:
    """Antilinear involution: lam * s_mu s_nu*  ->  conj(lam) * s_nu s_mu*."""
    result = AlgebraElement.__new__(AlgebraElement)
    result.terms = {(nu, mu): c.conjugate() for (mu, nu), c in x.terms.items()}
    return result


def gauge(z: complex, x: AlgebraElement) -> AlgebraElement:
    """Circle action: each term picks up z ** (len(mu) - len(nu))."""
    z = complex(z)
    if abs(abs(z) - 1.0) > 1e-12:
        raise InputError(f"gauge parameter must be unimodular, got |z| = {abs(z)}")
    out: dict[Key, complex] = {}
    for (mu, nu), c in x.terms.items():
        out[(mu, nu)] = c * z ** (len(mu) - len(nu))
    result = AlgebraElement.__new__(AlgebraElement)
    result.terms = out
    return result


def _require_weight(p: Path) -> float:
    if p.weight is None:
        raise UnsupportedPathError(
            f"path {p.edges} passes through a bundle member; no numeric weight"
        )
    return p.weight


def dynamics(zeta: complex, x: AlgebraElement) -> AlgebraElement:
    """Generalized gauge dynamics, analytically continued in zeta.

    Each term lam * s_mu s_nu* becomes lam * w(mu)^{i zeta} w(nu)^{-i zeta}
    * s_mu s_nu*, where w is the path weight.  Real zeta leaves coefficient
    moduli unchanged; zeta = i*beta multiplies by w(mu)^-beta w(nu)^beta.
    """
    zeta = complex(zeta)
    out: dict[Key, complex] = {}
    for (mu, nu), c in x.terms.items():
        dlog = math.log(_require_weight(mu)) - math.log(_require_weight(nu))
        factor = cmath.exp(1j * zeta * dlog) if dlog != 0.0 else 1.0
        coeff = c * factor
        if coeff != 0:
            out[(mu, nu)] = coeff
    result = AlgebraElement.__new__(AlgebraElement)
    result.terms = out
    return result


def cond_expect(x: AlgebraElement) -> AlgebraElement:
    """Projection onto the gauge-fixed part: drops terms with len(mu) != len(nu)."""
    result = AlgebraElement.__new__(AlgebraElement)
    result.terms = {
        (mu, nu): c for (mu, nu), c in x.terms.items() if len(mu) == len(nu)
    }
    return result


def expand(g: WeightedGraph, x: Monomial) -> AlgebraElement:
    """Rewrite s_mu s_nu* as the sum over incoming edges e at the source:
    sum_e s_{mu e} s_{nu e}*.  Defined only when the source vertex is regular.
    """
    v = x.mu.source_v
    vc = vertex_class(g, v)
    if vc.kind is not VertexKind.REGULAR:
        raise NotExpandableError(
            f"vertex {v!r} is singular ({vc.kind.value}); projection relation unavailable"
        )
    out: dict[Key, complex] = {}
    for e in g.edges_into(v):
        ep = edge_path(e)
        out[(concat(x.mu, ep), concat(x.nu, ep))] = 1.0
    result = AlgebraElement.__new__(AlgebraElement)
    result.terms = out
    return result


class FiltrationKind(Enum):
    FK = "Fk"
    EK = "Ek"
    OFF_CORE = "OffCore"


@dataclass(frozen=True)
class FiltrationTag:
    level: int
    kind: FiltrationKind


def classify(g: WeightedGraph, x: Monomial) -> FiltrationTag:
    """Locate a monomial in the core filtration.

    Off-core when the path lengths differ; otherwise level len(mu), tagged Ek
    when the common source is singular and Fk when it is regular.
    """
    if len(x.mu) != len(x.nu):
        return FiltrationTag(min(len(x.mu), len(x.nu)), FiltrationKind.OFF_CORE)
    kind = (
        FiltrationKind.EK
        if vertex_class(g, x.mu.source_v).is_singular
        else FiltrationKind.FK
    )
    return FiltrationTag(len(x.mu), kind)


def decompose_core(g: WeightedGraph, x: AlgebraElement, k: int) -> list[AlgebraElement]:
    """Split a core element into singular blocks E_0 .. E_{k-1} plus a level-k block.

    Terms at level j < k with a regular source are pushed down via expand
    until they reach level k; terms with a singular source stay at their
    level.  Returns k+1 elements that sum to x modulo the projection relation.
    """
    if k < 0:
        raise DecompositionError("level budget must be nonnegative")
    pending: list[dict[Key, complex]] = [{} for _ in range(k + 1)]
    for (mu, nu), c in x.terms.items():
        if len(mu) != len(nu):
            raise DecompositionError("element is not in the core (|mu| != |nu|)")
        if len(mu) > k:
            raise DecompositionError(
                f"term at level {len(mu)} exceeds the level budget {k}"
            )
        pending[len(mu)][(mu, nu)] = pending[len(mu)].get((mu, nu), 0j) + c
    components = [AlgebraElement() for _ in range(k + 1)]
    for j in range(k):
        singular_part: dict[Key, complex] = {}
        for (mu, nu), c in pending[j].items():
            if c == 0:
                continue
            if vertex_class(g, mu.source_v).is_singular:
                singular_part[(mu, nu)] = c
            else:
                for child_key, _ in expand(g, Monomial(mu, nu)).terms.items():
                    pending[j + 1][child_key] = pending[j + 1].get(child_key, 0j) + c
        components[j] = AlgebraElement(singular_part)
    components[k] = AlgebraElement(pending[k])
    return components
