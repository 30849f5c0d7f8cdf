"""Numeric certificates for the equilibrium identity and ground-state bounds.

Everything here checks concrete instances: the equilibrium identity
phi(x y) = phi(y sigma_{i beta}(x)) over monomial pairs with its nine-way
prefix-case bookkeeping, detection of traces that fail the fixed-point
condition, boundedness of analytic continuations for ground functionals,
and positivity sampling phi(a* a) >= 0.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .algebra import (
    AlgebraElement,
    Monomial,
    adjoint,
    dynamics,
    elem_add,
    elem_mul,
    expand,
    mono_mul,
    monomial_element,
    scalar_mul,
    vertex_projection,
)
from .errors import InputError, PreconditionError
from .graph import Path, WeightedGraph, enumerate_paths, strip_prefix, vertex_class, VertexKind
from .kms import GroundFunctional, KmsFunctional, Trace, check_k1, phi_eval

CaseLabel = tuple[int, str]


def enumerate_monomials(g: WeightedGraph, max_path_length: int) -> list[Monomial]:
    """All monomials whose two paths share a source and have length <= the cap."""
    by_source: dict[str, list[Path]] = {v: [] for v in g.vertices}
    for p in enumerate_paths(g, max_path_length):
        by_source[p.source_v].append(p)
    out: list[Monomial] = []
    for v in g.vertices:
        group = by_source[v]
        for mu in group:
            for nu in group:
                out.append(Monomial(mu, nu))
    return out


def nine_case(x: Monomial, y: Monomial) -> CaseLabel:
    """Prefix-case label of the pair: row from x*y, column from y*sigma(x).

    Row 1 when y's left path extends x's right path, row 2 for the reverse
    containment, row 3 otherwise; columns a/b/c likewise for x's left path
    against y's right path.  When both containments hold (equal paths) the
    first listed label wins, so equal pairs land in (1, a).
    """
    row = 1 if strip_prefix(x.nu, y.mu) is not None else (
        2 if strip_prefix(y.mu, x.nu) is not None else 3
    )
    col = "a" if strip_prefix(y.nu, x.mu) is not None else (
        "b" if strip_prefix(x.mu, y.nu) is not None else "c"
    )
    return (row, col)


@dataclass(frozen=True)
class KmsCheckResult:
    lhs: complex
    rhs: complex
    case_label: CaseLabel
    residual: float
    k1_warning: bool = False

    def to_dict(self) -> dict:
        return {
            "lhs": [self.lhs.real, self.lhs.imag],
            "rhs": [self.rhs.real, self.rhs.imag],
            "case": f"{self.case_label[0]}{self.case_label[1]}",
            "residual": self.residual,
            "k1_warning": self.k1_warning,
        }


def kms_identity(
    g: WeightedGraph,
    tau: Trace,
    beta: float,
    x: Monomial,
    y: Monomial,
    tol: float = 1e-9,
    k1_ok: bool | None = None,
) -> KmsCheckResult:
    """Evaluate both sides of the equilibrium identity on a monomial pair.

    The identity phi(x y) = phi(y sigma_{i beta}(x)) is guaranteed for traces
    passing the fixed-point check; for other traces the result only carries a
    warning flag, since the functional then fails to respect the projection
    relation and the two sides need not agree on the quotient.
    """
    f = KmsFunctional(g, tau, beta)
    lhs = phi_eval(f, mono_mul(x, y))
    continued = dynamics(complex(0.0, beta), monomial_element(x))
    rhs = phi_eval(f, elem_mul(monomial_element(y), continued))
    if k1_ok is None:
        k1_ok = check_k1(g, tau, beta, tol).ok
    return KmsCheckResult(
        lhs=lhs,
        rhs=rhs,
        case_label=nine_case(x, y),
        residual=abs(lhs - rhs),
        k1_warning=not k1_ok,
    )


@dataclass
class CoverageReport:
    trials: int
    seed: int
    counts: dict[str, int]
    max_residuals: dict[str, float]
    k1_warning: bool

    @property
    def cases_hit(self) -> set[str]:
        return set(self.counts)

    @property
    def max_residual(self) -> float:
        return max(self.max_residuals.values(), default=0.0)

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "seed": self.seed,
            "counts": dict(sorted(self.counts.items())),
            "max_residuals": dict(sorted(self.max_residuals.items())),
            "k1_warning": self.k1_warning,
        }


def case_coverage(
    g: WeightedGraph,
    tau: Trace,
    beta: float,
    max_path_length: int = 3,
    trials: int = 500,
    seed: int = 0,
) -> CoverageReport:
    """Sample monomial pairs, check the identity, and count prefix-case hits."""
    monomials = enumerate_monomials(g, max_path_length)
    if not monomials:
        raise InputError("graph yields no monomials to sample")
    rng = random.Random(seed)
    k1_ok = check_k1(g, tau, beta).ok
    counts: dict[str, int] = {}
    max_res: dict[str, float] = {}
    for _ in range(trials):
        x = rng.choice(monomials)
        y = rng.choice(monomials)
        result = kms_identity(g, tau, beta, x, y, k1_ok=k1_ok)
        label = f"{result.case_label[0]}{result.case_label[1]}"
        counts[label] = counts.get(label, 0) + 1
        max_res[label] = max(max_res.get(label, 0.0), result.residual)
    return CoverageReport(trials, seed, counts, max_res, k1_warning=not k1_ok)


def k1_violation_detect(
    g: WeightedGraph, tau: Trace, beta: float, tol: float = 1e-9
) -> list[tuple[str, float]]:
    """Regular vertices where the functional disagrees with its expansion.

    The disagreement phi(p_v) - phi(sum_e s_e s_e*) is exactly the fixed-point
    residual at v, so the returned list matches the check_k1 failures.
    """
    f = KmsFunctional(g, tau, beta)
    out: list[tuple[str, float]] = []
    for v in g.vertices:
        if vertex_class(g, v).kind is not VertexKind.REGULAR:
            continue
        p = Path.at_vertex(v)
        direct = phi_eval(f, vertex_projection(v))
        expanded = phi_eval(f, expand(g, Monomial(p, p)))
        residual = abs(direct - expanded)
        if residual > tol:
            out.append((v, residual))
    return out


@dataclass
class GroundBoundResult:
    bounded: bool
    max_modulus: float
    values: list[float]

    def to_dict(self) -> dict:
        return {
            "bounded": self.bounded,
            "max_modulus": self.max_modulus,
            "values": list(self.values),
        }


def ground_bound_check(
    g: WeightedGraph,
    functional,
    x: Monomial,
    y: Monomial,
    imag_grid: Sequence[float],
    tol: float = 1e-9,
) -> GroundBoundResult:
    """Track |functional(x * sigma_{iy}(y))| along imaginary parts y >= 0.

    For a genuine ground functional the modulus never grows in y (it is
    constant or decays); any growth across the grid flags the functional as
    unbounded.  Requires every weight > 1, the hypothesis under which
    boundedness characterizes ground states.
    """
    if not g.all_weights_above_one():
        raise PreconditionError("ground-state bound check requires c(e) > 1")
    grid = [float(t) for t in imag_grid]
    if not grid or any(t < 0.0 for t in grid):
        raise InputError("imaginary grid must be nonempty with entries >= 0")
    x_elem = monomial_element(x)
    y_elem = monomial_element(y)
    values: list[float] = []
    for t in grid:
        elt = elem_mul(x_elem, dynamics(complex(0.0, t), y_elem))
        values.append(abs(functional.eval(elt)))
    baseline = values[min(range(len(grid)), key=lambda i: grid[i])]
    bounded = max(values) <= baseline * (1.0 + tol) + tol
    return GroundBoundResult(bounded, max(values), values)


@dataclass(frozen=True)
class FaultInjectedFunctional:
    """A ground functional deliberately broken on one off-diagonal monomial.

    Used as a negative fixture: assigning mass to a monomial with a nonempty
    adjoint path makes the analytic continuation grow like w(nu)^y.
    """

    base: GroundFunctional
    mu: Path
    nu: Path
    value: complex = 1.0

    def eval(self, x: AlgebraElement) -> complex:
        extra = x.terms.get((self.mu, self.nu), 0j) * self.value
        return self.base.eval(x) + extra


@dataclass
class PositivityReport:
    min_value: float
    max_imag: float
    trials: int
    seed: int

    def to_dict(self) -> dict:
        return {
            "min_value": self.min_value,
            "max_imag": self.max_imag,
            "trials": self.trials,
            "seed": self.seed,
        }


def positivity_sample(
    g: WeightedGraph,
    tau: Trace,
    beta: float,
    max_level: int = 2,
    trials: int = 500,
    seed: int = 0,
    max_terms: int = 6,
) -> PositivityReport:
    """Smallest sampled phi(a* a) over random gauge-fixed elements a.

    For traces satisfying both trace conditions this should never drop below
    zero (up to rounding); traces violating subinvariance may produce genuine
    negatives, which are reported, not asserted.
    """
    f = KmsFunctional(g, tau, beta)
    diagonal = [m for m in enumerate_monomials(g, max_level) if m.is_diagonal]
    if not diagonal:
        raise InputError("no gauge-fixed monomials available to sample")
    rng = random.Random(seed)
    min_value = 0.0
    max_imag = 0.0
    for _ in range(trials):
        n_terms = rng.randint(1, max_terms)
        element = AlgebraElement()
        for _ in range(n_terms):
            coeff = complex(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0))
            element = elem_add(element, scalar_mul(coeff, monomial_element(rng.choice(diagonal))))
        value = phi_eval(f, elem_mul(adjoint(element), element))
        min_value = min(min_value, value.real)
        max_imag = max(max_imag, abs(value.imag))
    return PositivityReport(min_value, max_imag, trials, seed)
