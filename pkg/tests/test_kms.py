import math

import pytest

import graphkms as gk
from graphkms.algebra import Monomial, elem_add, elem_mul, expand, monomial_element, scalar_mul
from graphkms.errors import InfiniteEnumerationError, InputError, UnsupportedPathError
from graphkms.kms import (
    GroundFunctional,
    KmsFunctional,
    Trace,
    check_k1,
    check_k2,
    ground_eval,
    n_step_transfer,
    phi_eval,
    transfer,
)

LOG2_3 = math.log2(3.0)


# --- traces -------------------------------------------------------------------


def test_trace_rejects_negative_mass():
    with pytest.raises(InputError):
        Trace({"v": -0.1})


def test_trace_state_checks_total_mass():
    Trace.state({"a": 0.4, "b": 0.6})
    with pytest.raises(InputError):
        Trace.state({"a": 0.4, "b": 0.7})


def test_trace_missing_vertices_carry_zero():
    t = Trace({"a": 1.0})
    assert t.value("b") == 0.0


def test_trace_normalized():
    t = Trace({"a": 2.0, "b": 6.0}).normalized()
    assert t.value("a") == pytest.approx(0.25)
    assert t.mass == pytest.approx(1.0)


# --- transfer -------------------------------------------------------------------


def test_transfer_source_is_zero(two_vertex, two_vertex_tau):
    assert transfer(two_vertex, two_vertex_tau, 1.0, "v1") == 0.0


def test_transfer_two_vertex_fixture(two_vertex, two_vertex_tau):
    # 2^-1 * 0.4 + 3^-1 * 0.6 = 0.4
    value = transfer(two_vertex, two_vertex_tau, 1.0, "v0")
    assert value == pytest.approx(0.4, abs=1e-15)


def test_transfer_geometric_bundle_series(o_inf):
    assert transfer(o_inf, Trace({"v": 1.0}), 1.0, "v") == pytest.approx(1.0)
    assert transfer(o_inf, Trace({"v": 1.0}), 2.0, "v") == pytest.approx(1.0 / 3.0)


def test_transfer_divergent_bundle_is_inf():
    g = gk.constant_bundle_loop_graph(math.e)
    assert math.isinf(transfer(g, Trace({"v": 1.0}), 5.0, "v"))


def test_transfer_divergent_bundle_with_zero_upstream_mass():
    g = gk.WeightedGraph(
        ["u", "v"],
        bundles=[gk.EdgeBundle("b", "u", "v", gk.constant_weight_family(2.0))],
    )
    assert transfer(g, Trace({"v": 1.0}), 1.0, "v") == 0.0
    assert math.isinf(transfer(g, Trace({"u": 0.5, "v": 0.5}), 1.0, "v"))


def test_n_step_one_equals_transfer(two_vertex, two_vertex_tau):
    assert n_step_transfer(two_vertex, two_vertex_tau, 1.0, "v0", 1) == transfer(
        two_vertex, two_vertex_tau, 1.0, "v0"
    )


def test_n_step_three_loops_at_critical_beta(three_loop):
    value = n_step_transfer(three_loop, Trace({"v": 1.0}), LOG2_3, "v", 2)
    assert value == pytest.approx(1.0, abs=1e-12)


def test_n_step_source_is_zero(two_vertex, two_vertex_tau):
    for n in (1, 2, 3):
        assert n_step_transfer(two_vertex, two_vertex_tau, 1.0, "v1", n) == 0.0


def test_n_step_bundle_obstruction(o_inf):
    with pytest.raises(InfiniteEnumerationError):
        n_step_transfer(o_inf, Trace({"v": 1.0}), 1.0, "v", 2)


def test_n_step_matches_matrix_powers(rich4, rich4_state):
    import numpy as np

    beta, tau = rich4_state
    A = gk.transfer_matrix(rich4, beta)
    vec = np.array([tau.value(v) for v in rich4.vertices])
    for n in (1, 2, 3, 4):
        expected = np.linalg.matrix_power(A, n) @ vec
        for i, v in enumerate(rich4.vertices):
            assert n_step_transfer(rich4, tau, beta, v, n) == pytest.approx(
                expected[i], rel=1e-10
            )


# --- the candidate KMS functional ----------------------------------------------


def test_phi_on_projection_gives_trace(two_vertex, two_vertex_tau):
    f = KmsFunctional(two_vertex, two_vertex_tau, 1.0)
    assert phi_eval(f, gk.vertex_projection("v0")) == pytest.approx(0.4)


def test_phi_discounts_diagonal_monomials():
    g = gk.WeightedGraph(["v0", "v1"], [gk.Edge("in", "v1", "v0", 2.0)])
    f = KmsFunctional(g, Trace({"v0": 0.4, "v1": 0.6}), 1.0)
    x = elem_mul(gk.isometry(g, "in"), gk.co_isometry(g, "in"))
    assert phi_eval(f, x) == pytest.approx(0.3)


def test_phi_kills_off_diagonal(two_vertex, two_vertex_tau):
    f = KmsFunctional(two_vertex, two_vertex_tau, 1.0)
    assert phi_eval(f, gk.isometry(two_vertex, "loop")) == 0


def test_phi_requires_positive_beta(two_vertex, two_vertex_tau):
    with pytest.raises(InputError):
        KmsFunctional(two_vertex, two_vertex_tau, 0.0)


def test_phi_rejects_bundle_paths(o_inf):
    member = gk.make_path(o_inf, ["loop:1"])
    f = KmsFunctional(o_inf, Trace({"v": 1.0}), 1.0)
    with pytest.raises(UnsupportedPathError):
        phi_eval(f, monomial_element(Monomial(member, member)))


def test_phi_linear_and_positive_on_diagonals(rich4, rich4_state):
    beta, tau = rich4_state
    f = KmsFunctional(rich4, tau, beta)
    diagonal = [m for m in gk.enumerate_monomials(rich4, 2) if m.is_diagonal]
    x = gk.AlgebraElement()
    for i, m in enumerate(diagonal[:8]):
        x = elem_add(x, scalar_mul(0.25 + i, monomial_element(m)))
    value = phi_eval(f, x)
    assert value.imag == pytest.approx(0.0, abs=1e-15)
    assert value.real >= 0.0
    parts = sum(
        (0.25 + i) * phi_eval(f, monomial_element(m)) for i, m in enumerate(diagonal[:8])
    )
    assert value == pytest.approx(parts)


# --- condition checks -----------------------------------------------------------


def test_check_k1_passes_on_consistent_trace(two_vertex, two_vertex_tau):
    report = check_k1(two_vertex, two_vertex_tau, 1.0)
    assert report.ok
    assert [r.vertex for r in report.rows] == ["v0"]
    assert report.rows[0].residual <= 1e-15


def test_check_k1_flags_violation(two_vertex):
    report = check_k1(two_vertex, Trace({"v0": 0.5, "v1": 0.5}), 1.0)
    assert not report.ok
    (row,) = report.violations
    assert row.vertex == "v0"
    assert row.residual == pytest.approx(0.5 - (0.25 + 0.5 / 3.0), abs=1e-12)


def test_check_k1_vacuous_without_regular_vertices():
    g = gk.WeightedGraph(["a", "b"])
    report = check_k1(g, Trace({"a": 0.5, "b": 0.5}), 1.0)
    assert report.ok and report.rows == ()


def test_check_k2_geometric_bundle(o_inf):
    assert check_k2(o_inf, Trace({"v": 1.0}), 2.0).ok
    report = check_k2(o_inf, Trace({"v": 1.0}), 0.5)
    assert not report.ok
    (row,) = report.rows
    assert row.lhs == pytest.approx(2.0**-0.5 / (1.0 - 2.0**-0.5))


def test_check_k2_source_only_graph_passes():
    g = gk.WeightedGraph(["a", "b"])
    assert check_k2(g, Trace({"a": 0.3, "b": 0.7}), 1.0).ok


def test_check_k2_divergence_fails_with_upstream_mass():
    g = gk.constant_bundle_loop_graph()
    report = check_k2(g, Trace({"v": 1.0}), 3.0)
    assert not report.ok
    assert math.isinf(report.rows[0].lhs)


def test_report_serialization_shape(two_vertex, two_vertex_tau):
    report = check_k1(two_vertex, two_vertex_tau, 1.0)
    d = report.to_dict()
    assert set(d) == {"condition", "tol", "pass", "rows"}
    assert set(d["rows"][0]) == {"vertex", "lhs", "rhs", "residual", "pass"}
    import json

    assert json.loads(report.to_json()) == d


def test_subinvariance_iterates(two_vertex, two_vertex_tau):
    # K2 holds with equality at v0 and slack at v1; every n-step sum stays below
    assert check_k2(two_vertex, two_vertex_tau, 1.0).ok
    for v in two_vertex.vertices:
        for n in range(1, 5):
            value = n_step_transfer(two_vertex, two_vertex_tau, 1.0, v, n)
            assert value <= two_vertex_tau.value(v) + 1e-9


def test_k1_failure_detectability_is_exact(two_vertex):
    tau = Trace({"v0": 0.5, "v1": 0.5})
    f = KmsFunctional(two_vertex, tau, 1.0)
    p = gk.Path.at_vertex("v0")
    direct = phi_eval(f, gk.vertex_projection("v0"))
    expanded = phi_eval(f, expand(two_vertex, Monomial(p, p)))
    report = check_k1(two_vertex, tau, 1.0)
    assert abs(direct - expanded) == report.rows[0].residual


# --- ground functionals ----------------------------------------------------------


def test_ground_eval_on_singular_projection(two_vertex):
    gf = GroundFunctional(two_vertex, Trace({"v1": 1.0}))
    assert ground_eval(gf, gk.vertex_projection("v1")) == 1.0


def test_ground_eval_kills_path_monomials(two_vertex):
    gf = GroundFunctional(two_vertex, Trace({"v1": 1.0}))
    x = elem_mul(gk.isometry(two_vertex, "in"), gk.co_isometry(two_vertex, "in"))
    assert ground_eval(gf, x) == 0
    assert ground_eval(gf, gk.isometry(two_vertex, "in")) == 0


def test_ground_functional_rejects_regular_support(two_vertex):
    with pytest.raises(InputError):
        GroundFunctional(two_vertex, Trace({"v0": 1.0}))


def test_ground_functional_allows_infinite_receiver(o_inf):
    gf = GroundFunctional(o_inf, Trace({"v": 1.0}))
    assert ground_eval(gf, gk.vertex_projection("v")) == 1.0
