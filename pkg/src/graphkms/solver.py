"""Feasibility and geometry of the KMS trace polytope, and derived solvers.

For a finite vertex set the trace conditions form a small linear system over
the probability simplex: one equality row per regular vertex (fixed point of
the transfer map) and one inequality row per infinite receiver (subinvariance
with bundle series folded into the coefficients).  Feasibility is decided by
a textbook two-phase simplex with Bland's rule; extreme points by active-set
enumeration; the critical inverse temperature by bisection on the unit
spectral radius (or unit series value for single-vertex bundle templates).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import InputError, PreconditionError
from .graph import VertexKind, WeightedGraph, vertex_class
from .kms import Trace, _require_beta

DEFAULT_CAP = 15
_FEAS_TOL = 1e-9
_ACTIVE_TOL = 1e-8


# ---------------------------------------------------------------------------
# Two-phase simplex (dense, Bland's rule, doubles)


@dataclass
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None = None
    objective: float | None = None


def _pivot(tab: np.ndarray, basis: list[int], row: int, col: int) -> None:
    tab[row] /= tab[row, col]
    for i in range(tab.shape[0]):
        if i != row and tab[i, col] != 0.0:
            tab[i] -= tab[i, col] * tab[row]
    basis[row] = col


def _bland_iterate(
    tab: np.ndarray, basis: list[int], ncols: int, tol: float, max_iter: int
) -> str:
    m = tab.shape[0] - 1
    for _ in range(max_iter):
        entering = -1
        for j in range(ncols):
            if tab[m, j] < -tol:
                entering = j
                break
        if entering < 0:
            return "optimal"
        leaving = -1
        best = math.inf
        for i in range(m):
            a = tab[i, entering]
            if a > tol:
                ratio = tab[i, -1] / a
                if ratio < best - 1e-12 or (
                    abs(ratio - best) <= 1e-12
                    and (leaving < 0 or basis[i] < basis[leaving])
                ):
                    best = ratio
                    leaving = i
        if leaving < 0:
            return "unbounded"
        _pivot(tab, basis, leaving, entering)
    raise ArithmeticError("simplex did not terminate within the iteration cap")


def linear_program(
    c: Sequence[float],
    A_eq: np.ndarray | None = None,
    b_eq: Sequence[float] | None = None,
    A_ub: np.ndarray | None = None,
    b_ub: Sequence[float] | None = None,
    tol: float = _FEAS_TOL,
    max_iter: int = 20000,
) -> LpResult:
    """min c.x  s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  x >= 0."""
    c = np.asarray(c, dtype=float)
    n = c.size
    n_ub = 0 if A_ub is None else np.asarray(A_ub).shape[0]
    rows: list[np.ndarray] = []
    rhs: list[float] = []
    if A_eq is not None:
        for row, b in zip(np.asarray(A_eq, dtype=float), np.asarray(b_eq, dtype=float)):
            rows.append(np.concatenate([row, np.zeros(n_ub)]))
            rhs.append(float(b))
    if A_ub is not None:
        for i, (row, b) in enumerate(
            zip(np.asarray(A_ub, dtype=float), np.asarray(b_ub, dtype=float))
        ):
            slack = np.zeros(n_ub)
            slack[i] = 1.0
            rows.append(np.concatenate([row, slack]))
            rhs.append(float(b))
    N = n + n_ub
    if not rows:
        # only the nonnegativity bounds: x = 0 unless some cost is negative
        if np.any(c < -tol):
            return LpResult("unbounded")
        return LpResult("optimal", np.zeros(n), 0.0)
    A = np.vstack(rows)
    b = np.asarray(rhs, dtype=float)
    negative = b < 0
    A[negative] *= -1.0
    b[negative] *= -1.0
    m = A.shape[0]

    # phase 1: artificial basis, minimize the artificial mass
    tab = np.zeros((m + 1, N + m + 1))
    tab[:m, :N] = A
    tab[:m, N : N + m] = np.eye(m)
    tab[:m, -1] = b
    basis = list(range(N, N + m))
    tab[m, N : N + m] = 1.0
    for i in range(m):
        tab[m] -= tab[i]
    status = _bland_iterate(tab, basis, N + m, tol, max_iter)
    if status != "optimal":
        raise ArithmeticError("phase-1 simplex cannot be unbounded")
    if -tab[m, -1] > tol:
        return LpResult("infeasible")

    # drive remaining artificials out of the basis, drop redundant rows
    keep = list(range(m))
    for i in range(m):
        if basis[i] >= N:
            pivot_col = -1
            for j in range(N):
                if abs(tab[i, j]) > tol:
                    pivot_col = j
                    break
            if pivot_col >= 0:
                _pivot(tab, basis, i, pivot_col)
            else:
                keep.remove(i)
    tab = np.concatenate([tab[keep][:, list(range(N)) + [-1]], np.zeros((1, N + 1))])
    basis = [basis[i] for i in keep]
    m = len(basis)

    if np.any(c != 0.0):
        # phase 2 with the original objective, reduced against the basis
        tab[m, :n] = c
        for i in range(m):
            cb = tab[m, basis[i]]
            if cb != 0.0:
                tab[m] -= cb * tab[i]
        status = _bland_iterate(tab, basis, N, tol, max_iter)
        if status == "unbounded":
            return LpResult("unbounded")
    x_full = np.zeros(N)
    for i, bi in enumerate(basis):
        x_full[bi] = tab[i, -1]
    x = x_full[:n]
    return LpResult("optimal", x, float(c @ x))


# ---------------------------------------------------------------------------
# Polytope assembly


@dataclass
class KmsPolytope:
    """Linear description of the admissible traces at a fixed beta.

    Equality rows are (transfer row - unit row) at regular vertices, plus a
    forced tau_w = 0 row for the source of every divergent bundle series;
    inequality rows are the same shape at infinite receivers.  The simplex
    constraints (tau >= 0, total mass 1) are implicit.
    """

    beta: float
    vertices: tuple[str, ...]
    eq_rows: np.ndarray
    eq_labels: tuple[str, ...]
    ub_rows: np.ndarray
    ub_labels: tuple[str, ...]
    forced_zero: tuple[str, ...]

    @property
    def n(self) -> int:
        return len(self.vertices)


def build_polytope(g: WeightedGraph, beta: float) -> KmsPolytope:
    _require_beta(beta)
    names = g.vertices
    n = len(names)
    idx = {v: i for i, v in enumerate(names)}
    eq_rows: list[np.ndarray] = []
    eq_labels: list[str] = []
    ub_rows: list[np.ndarray] = []
    ub_labels: list[str] = []
    forced: list[str] = []
    for v in names:
        vc = vertex_class(g, v)
        if vc.kind is VertexKind.SOURCE:
            continue
        row = np.zeros(n)
        for e in g.edges_into(v):
            row[idx[e.src]] += e.weight**-beta
        if vc.kind is VertexKind.REGULAR:
            row[idx[v]] -= 1.0
            eq_rows.append(row)
            eq_labels.append(v)
            continue
        for b in g.bundles_into(v):
            s = b.series(beta)
            if math.isinf(s):
                # divergent series: feasible only with zero upstream mass
                if b.src not in forced:
                    forced.append(b.src)
            else:
                row[idx[b.src]] += s
        row[idx[v]] -= 1.0
        ub_rows.append(row)
        ub_labels.append(v)
    return KmsPolytope(
        beta=beta,
        vertices=names,
        eq_rows=np.array(eq_rows).reshape(len(eq_rows), n),
        eq_labels=tuple(eq_labels),
        ub_rows=np.array(ub_rows).reshape(len(ub_rows), n),
        ub_labels=tuple(ub_labels),
        forced_zero=tuple(forced),
    )


def _full_equalities(poly: KmsPolytope) -> tuple[np.ndarray, np.ndarray]:
    """Mass row, transfer equalities, and forced-zero rows with their rhs."""
    n = poly.n
    idx = {v: i for i, v in enumerate(poly.vertices)}
    rows = [np.ones(n)]
    rhs = [1.0]
    for row in poly.eq_rows:
        rows.append(row)
        rhs.append(0.0)
    for v in poly.forced_zero:
        unit = np.zeros(n)
        unit[idx[v]] = 1.0
        rows.append(unit)
        rhs.append(0.0)
    return np.vstack(rows), np.asarray(rhs)


@dataclass
class SolveReport:
    beta: float
    feasible: bool
    witness: Trace | None
    extreme_points: list[Trace]
    dimension: int | None
    enumeration_error: str | None = None

    @property
    def extreme_count(self) -> int:
        return len(self.extreme_points)

    def to_dict(self) -> dict:
        return {
            "beta": self.beta,
            "feasible": self.feasible,
            "witness": self.witness.to_dict() if self.witness else None,
            "extreme_points": [t.to_dict() for t in self.extreme_points],
            "dimension": self.dimension,
            "enumeration_error": self.enumeration_error,
        }


def _clip_trace(vertices: tuple[str, ...], x: np.ndarray) -> Trace:
    # basic solutions carry solver dust; snap it so reports read cleanly
    values = {}
    for i, v in enumerate(vertices):
        value = float(x[i])
        values[v] = 0.0 if abs(value) < 1e-12 else max(0.0, value)
    return Trace(values)


def _affine_dimension(points: list[np.ndarray]) -> int:
    if not points:
        return -1
    if len(points) == 1:
        return 0
    diffs = np.array(points[1:]) - points[0]
    sv = np.linalg.svd(diffs, compute_uv=False)
    return int(np.sum(sv > 1e-7 * max(1.0, sv[0])))


def _enumerate_extremes(
    poly: KmsPolytope, E: np.ndarray, e_rhs: np.ndarray
) -> list[np.ndarray]:
    n = poly.n
    rank = int(np.linalg.matrix_rank(E)) if E.size else 0
    need = max(0, n - rank)
    candidates: list[np.ndarray] = [row for row in poly.ub_rows]
    for i in range(n):
        unit = np.zeros(n)
        unit[i] = 1.0
        candidates.append(unit)
    found: dict[tuple, np.ndarray] = {}
    for combo in combinations(range(len(candidates)), need):
        M = np.vstack([E] + [candidates[i] for i in combo]) if combo else E
        rhs = np.concatenate([e_rhs, np.zeros(len(combo))])
        if np.linalg.matrix_rank(M) < n:
            continue
        x, *_ = np.linalg.lstsq(M, rhs, rcond=None)
        if np.any(x < -1e-9):
            continue
        if E.size and np.max(np.abs(E @ x - e_rhs)) > _ACTIVE_TOL:
            continue
        if poly.ub_rows.size and np.max(poly.ub_rows @ x) > _ACTIVE_TOL:
            continue
        key = tuple(np.round(x, 8))
        found.setdefault(key, x)
    return sorted(found.values(), key=lambda p: tuple(p))


def solve(
    g: WeightedGraph, beta: float, cap: int = DEFAULT_CAP, tol: float = _FEAS_TOL
) -> SolveReport:
    """Decide whether an admissible trace exists at beta and describe them all.

    Feasibility comes from a phase-1 simplex; when the vertex count is within
    the enumeration cap, every extreme point of the trace polytope is listed
    and the affine dimension of the solution set reported.
    """
    if cap < 1:
        raise InputError("enumeration cap must be >= 1")
    poly = build_polytope(g, beta)
    E, e_rhs = _full_equalities(poly)
    A_ub = poly.ub_rows if poly.ub_rows.size else None
    b_ub = np.zeros(poly.ub_rows.shape[0]) if poly.ub_rows.size else None
    lp = linear_program(np.zeros(poly.n), A_eq=E, b_eq=e_rhs, A_ub=A_ub, b_ub=b_ub, tol=tol)
    if lp.status == "infeasible":
        return SolveReport(beta, False, None, [], -1)
    witness = _clip_trace(poly.vertices, lp.x)
    if poly.n > cap:
        return SolveReport(
            beta,
            True,
            witness,
            [],
            None,
            enumeration_error=f"vertex count {poly.n} above enumeration cap {cap}",
        )
    points = _enumerate_extremes(poly, E, e_rhs)
    if not points:
        points = [np.array([witness.value(v) for v in poly.vertices])]
    extremes = [_clip_trace(poly.vertices, p) for p in points]
    return SolveReport(beta, True, witness, extremes, _affine_dimension(points))


# ---------------------------------------------------------------------------
# Spectral radius and critical inverse temperature


def transfer_matrix(g: WeightedGraph, beta: float) -> np.ndarray:
    """Weighted backward-adjacency matrix: entry [v, w] sums w(e)^-beta over edges w -> v."""
    if g.bundles:
        raise PreconditionError("transfer matrix requires a bundle-free graph")
    _require_beta(beta)
    n = len(g.vertices)
    idx = {v: i for i, v in enumerate(g.vertices)}
    A = np.zeros((n, n))
    for e in g.edges:
        A[idx[e.dst], idx[e.src]] += e.weight**-beta
    return A


def _power_radius(A: np.ndarray, tol: float, max_iter: int = 10000) -> float | None:
    """Largest eigenvalue modulus of a nonnegative matrix, or None on stall."""
    n = A.shape[0]
    x = np.full(n, 1.0 / n)
    lam = None
    for _ in range(max_iter):
        y = A @ x
        s = float(y.sum())
        if s <= 0.0:
            return 0.0
        if lam is not None and abs(s - lam) <= tol * max(s, 1e-300):
            return s
        lam = s
        x = y / s
    return None


def spectral_radius(g: WeightedGraph, beta: float, tol: float = 1e-12) -> float:
    """Perron root of the transfer matrix by power iteration.

    Deterministic uniform start vector.  If the iteration stalls (periodic or
    defective reducible matrices), falls back to per-strongly-connected-
    component computation and reports the maximum.
    """
    A = transfer_matrix(g, beta)
    lam = _power_radius(A, tol)
    if lam is not None:
        return lam
    n_comp, labels = connected_components(
        csr_matrix(A > 0.0), directed=True, connection="strong"
    )
    best = 0.0
    for comp in range(n_comp):
        ix = np.where(labels == comp)[0]
        sub = A[np.ix_(ix, ix)]
        if len(ix) == 1:
            best = max(best, float(abs(sub[0, 0])))
            continue
        scale = float(sub.max())
        if scale <= 0.0:
            continue
        # an irreducible block shifted by the identity is primitive, so the
        # plain iteration converges geometrically unless the gap is tiny
        shifted = sub / scale + np.eye(len(ix))
        lam_b = _power_radius(shifted, tol)
        if lam_b is not None:
            best = max(best, (lam_b - 1.0) * scale)
        else:
            # near-degenerate gap: fall back to a dense eigensolve of the block
            best = max(best, float(np.max(np.abs(np.linalg.eigvals(sub)))))
    return best


def _is_strongly_connected(g: WeightedGraph) -> bool:
    n = len(g.vertices)
    if n == 1:
        return True
    idx = {v: i for i, v in enumerate(g.vertices)}
    A = np.zeros((n, n), dtype=bool)
    for e in g.edges:
        A[idx[e.dst], idx[e.src]] = True
    n_comp, _ = connected_components(csr_matrix(A), directed=True, connection="strong")
    return n_comp == 1


def critical_beta(g: WeightedGraph, tol: float = 1e-9) -> float | None:
    """Least beta at which the decay indicator reaches 1, or None if it never does.

    For a bundle-free strongly connected graph the indicator is the spectral
    radius of the transfer matrix; for a single-vertex bundle template it is
    the total loop series value.  Requires every weight > 1 so the indicator
    is strictly decreasing in beta.
    """
    if not g.all_weights_above_one():
        raise PreconditionError("critical beta requires c(e) > 1 for every edge")
    if g.bundles:
        if len(g.vertices) != 1:
            raise PreconditionError(
                "bundle graphs are supported only as single-vertex templates"
            )

        def indicator(beta: float) -> float:
            total = sum(e.weight**-beta for e in g.edges)
            total += sum(b.series(beta) for b in g.bundles)
            return total

    else:
        if not _is_strongly_connected(g):
            raise PreconditionError(
                "critical beta needs a strongly connected graph (or a bundle template)"
            )

        def indicator(beta: float) -> float:
            return spectral_radius(g, beta, tol=1e-13)

    lo, hi = 1e-6, 64.0
    if indicator(lo) < 1.0:
        return None
    while indicator(hi) >= 1.0:
        if hi >= 1024.0:
            return None
        hi *= 2.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if indicator(mid) >= 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Scans and ground-state geometry


@dataclass
class BetaScanRow:
    beta: float
    feasible: bool
    dimension: int | None
    extreme_count: int

    def to_dict(self) -> dict:
        return {
            "beta": self.beta,
            "feasible": self.feasible,
            "dimension": self.dimension,
            "extreme_count": self.extreme_count,
        }


@dataclass
class BetaScanReport:
    rows: list[BetaScanRow]
    monotone: bool
    threshold: float | None

    def to_dict(self) -> dict:
        return {
            "rows": [r.to_dict() for r in self.rows],
            "monotone": self.monotone,
            "threshold": self.threshold,
        }


def beta_scan(
    g: WeightedGraph,
    grid: Iterable[float],
    cap: int = DEFAULT_CAP,
    max_workers: int | None = None,
) -> BetaScanReport:
    """Per-beta solve summaries over a grid, merged in grid order.

    A feasibility threshold is labeled only when the scan is actually
    monotone (infeasible then feasible) and every weight exceeds 1.
    """
    betas = [float(b) for b in grid]
    for b in betas:
        _require_beta(b)
    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            reports = list(pool.map(lambda b: solve(g, b, cap=cap), betas))
    else:
        reports = [solve(g, b, cap=cap) for b in betas]
    rows = [
        BetaScanRow(r.beta, r.feasible, r.dimension, r.extreme_count) for r in reports
    ]
    flags = [r.feasible for r in rows]
    ascending = all(betas[i] < betas[i + 1] for i in range(len(betas) - 1))
    monotone = (
        ascending
        and all(flags[i] <= flags[i + 1] for i in range(len(flags) - 1))
        and g.all_weights_above_one()
    )
    threshold = None
    if monotone and any(flags):
        threshold = rows[flags.index(True)].beta
    return BetaScanReport(rows, monotone, threshold)


@dataclass
class GroundReport:
    singular_vertices: tuple[str, ...]
    dimension: int

    def to_dict(self) -> dict:
        return {
            "singular_vertices": list(self.singular_vertices),
            "dimension": self.dimension,
        }


def ground_simplex(g: WeightedGraph) -> GroundReport:
    """Singular vertices and the dimension of the simplex of traces on them.

    Ground states are exactly the probability measures on the singular
    vertices once every weight exceeds 1, which is enforced here.
    """
    if not g.all_weights_above_one():
        raise PreconditionError("ground states require c(e) > 1 for every edge")
    singular = tuple(v for v in g.vertices if vertex_class(g, v).is_singular)
    return GroundReport(singular, len(singular) - 1)


@dataclass
class StarTruncationRow:
    level: int
    beta: float | None
    solve_feasible: bool | None

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "beta": self.beta,
            "solve_feasible": self.solve_feasible,
        }


def star_truncation_scan(
    weight_fn: Callable[[int], float],
    source_profile: Callable[[int], float],
    center_mass: float,
    levels: Iterable[int],
    tol: float = 1e-9,
) -> list[StarTruncationRow]:
    """Feasibility thresholds of truncated star graphs for a fixed trace profile.

    For each truncation level N the star has sources 1..N feeding one center;
    the subinvariance constraint for the (renormalized) profile reads

        sum_{n<=N} weight(n)^-beta * profile(n)  <=  center_mass

    and the reported beta is where it first holds, found by bisection (0.0
    when it holds for every beta > 0, None when it never holds).  The profile
    is taken as input, not solved for; the truncated graph is solved at the
    threshold as a cross-check.
    """
    from .templates import truncated_star_graph

    if not center_mass >= 0.0:
        raise InputError("center mass must be nonnegative")
    rows: list[StarTruncationRow] = []
    for n_level in levels:
        if n_level < 1:
            raise InputError("truncation level must be >= 1")
        weights = [float(weight_fn(n)) for n in range(1, n_level + 1)]
        masses = [float(source_profile(n)) for n in range(1, n_level + 1)]
        if any(w <= 1.0 for w in weights):
            raise PreconditionError(
                "star truncation requires source weights > 1 (summable decay)"
            )
        if any(m < 0.0 for m in masses):
            raise InputError("profile masses must be nonnegative")

        def lhs(beta: float) -> float:
            return sum(w**-beta * m for w, m in zip(weights, masses))

        if sum(masses) == 0.0 or lhs(0.0) <= center_mass:
            beta: float | None = 0.0
        elif center_mass == 0.0:
            beta = None  # positive mass can never fit under a zero center
        else:
            lo, hi = 0.0, 1.0
            while lhs(hi) > center_mass:
                hi *= 2.0
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                if lhs(mid) > center_mass:
                    lo = mid
                else:
                    hi = mid
            beta = 0.5 * (lo + hi)
        feasible = None
        if beta is not None and beta > 0.0:
            graph = truncated_star_graph(n_level, weight_fn)
            feasible = solve(graph, beta, cap=max(DEFAULT_CAP, n_level + 1)).feasible
        rows.append(StarTruncationRow(n_level, beta, feasible))
    return rows
