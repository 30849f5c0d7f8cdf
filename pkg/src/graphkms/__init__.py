"""KMS and ground states for the generalized gauge action on weighted graph algebras."""

from .algebra import (
    AlgebraElement,
    FiltrationKind,
    FiltrationTag,
    Monomial,
    adjoint,
    classify,
    cond_expect,
    decompose_core,
    dynamics,
    elem_add,
    elem_mul,
    expand,
    gauge,
    isometry,
    co_isometry,
    mono_mul,
    monomial_element,
    scalar_mul,
    vertex_projection,
)
from .graph import (
    Edge,
    EdgeBundle,
    ExplicitTail,
    Geometric,
    Path,
    VertexClass,
    VertexKind,
    WeightedGraph,
    concat,
    constant_weight_family,
    enumerate_paths,
    graph_from_dict,
    is_singular,
    load_graph,
    make_path,
    path_weight,
    paths_into,
    vertex_class,
)
from .kms import (
    ConditionReport,
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
from .render import parse_element, render_element
from .solver import (
    BetaScanReport,
    GroundReport,
    KmsPolytope,
    SolveReport,
    beta_scan,
    build_polytope,
    critical_beta,
    ground_simplex,
    linear_program,
    solve,
    spectral_radius,
    star_truncation_scan,
    transfer_matrix,
)
from .templates import (
    bundle_loop_graph,
    bundled_star_graph,
    constant_bundle_loop_graph,
    loops_graph,
    truncated_star_graph,
)
from .verify import (
    CoverageReport,
    FaultInjectedFunctional,
    GroundBoundResult,
    KmsCheckResult,
    PositivityReport,
    case_coverage,
    enumerate_monomials,
    ground_bound_check,
    k1_violation_detect,
    kms_identity,
    nine_case,
    positivity_sample,
)

__version__ = "0.1.0"
