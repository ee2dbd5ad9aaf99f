"""Discrete logarithmic Kirchhoff equations on Z^3 lattice truncations.

Library and CLI for computing least-energy sign-changing solutions and
ground states of

    -(a + b * sum |grad u|^2) Lu + (lambda h(x) + 1) u = |u|^(p-2) u log u^2

on finite truncations of the integer lattice, and of the corresponding
bounded-well problem with zero vertex-boundary data, by minimization over
the Nehari-type constraint sets.
"""

from .calculus import (
    Field,
    cross_term,
    dirichlet_energy,
    gradient_form,
    h_lambda_norm_sq,
    laplacian,
    lp_norm,
    set_summation_mode,
    split_signs,
)
from .energy import (
    EnergyBreakdown,
    Problem,
    SplitScalars,
    energy,
    euler_lagrange_residual,
    level_identity,
    nehari_residuals,
    pairing,
    scaling_gap,
    split_expansion,
)
from .experiments import (
    SweepReport,
    aligned_h1_distance,
    convergence_report,
    embed_field,
    h1_norm,
    lambda_sweep,
    radius_study,
)
from .lattice import (
    DomainSpec,
    LatticeGraph,
    build_box,
    build_rect_box,
    closed_ball_count,
    graph_distance,
    is_connected,
    vertex_boundary,
)
from .model import (
    ModelParams,
    NonlinearityBounds,
    PotentialSpec,
    bound_constant,
    log_force,
    log_force_deriv,
    log_term,
    potential_eval,
    potential_values,
    validate_potential,
)
from .nehari import (
    NehariProjection,
    find_bracket,
    g_pair,
    project_pair,
    project_scalar,
    projected_field,
    shrink_property_check,
)
from .solver import (
    SeedSpec,
    SolveReport,
    SolverOptions,
    build_seed,
    default_seeds,
    minimize_ground,
    minimize_sign_changing,
    newton_refine,
    solve_limit_problem,
)

__version__ = "0.1.0"
