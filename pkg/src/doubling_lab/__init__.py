"""Doubling constants of finite metric measure spaces.

Exact computation of ``C_mu`` for a given measure, certified brackets for
the least constant over all measures, lower-bound certificates, named
metric families and closed-form continuum checks.
"""

__version__ = "0.1.0"

from .bounds import (  # noqa: E402
    BoundCertificate,
    ThetaConfiguration,
    all_certificates,
    disjoint_pair_bound,
    envelope_bound,
    equilateral_bound,
    find_theta_configuration,
    golden_ratio_bound,
    intersection_ratio_bound,
    lemma34_root,
    replay_certificate,
    separated_balls_bound,
    spread_bound,
    theta_configuration_bound,
)
from .continuum import (  # noqa: E402
    AlphaMeasureQuery,
    d2_divergence,
    lebesgue_ratio,
    mu_alpha_lower_bound,
    mu_alpha_mass,
    packing_lower_bound,
)
from .errors import ComputationError, DoublingLabError, InvalidInput  # noqa: E402
from .families import (  # noqa: E402
    FamilySpec,
    bounded_transform,
    complete,
    cycle,
    from_edge_list,
    generate,
    grid,
    path,
    snowflake,
    star,
    tree,
)
from .measures import CmuReport, Measure, RatioProfile, boost_measure, cmu, ratio_profile  # noqa: E402
from .metric import (  # noqa: E402
    Ball,
    CriticalRadiusSet,
    FiniteMetricSpace,
    ball,
    ceil_log2_ratio,
    closed_ball,
    critical_radii,
    validate_metric,
)
from .optimizer import (  # noqa: E402
    FeasibilityProblem,
    Infeasible,
    OptimizationResult,
    brute_force_least,
    feasible,
    least_constant,
)

__all__ = [
    "AlphaMeasureQuery", "Ball", "BoundCertificate", "CmuReport", "ComputationError",
    "CriticalRadiusSet", "DoublingLabError", "FamilySpec", "FeasibilityProblem", "FiniteMetricSpace",
    "Infeasible", "InvalidInput", "Measure", "OptimizationResult", "RatioProfile", "ThetaConfiguration",
    "all_certificates", "ball", "boost_measure", "bounded_transform", "brute_force_least",
    "ceil_log2_ratio", "closed_ball", "cmu", "complete", "critical_radii", "cycle", "d2_divergence",
    "disjoint_pair_bound", "envelope_bound", "equilateral_bound", "feasible", "find_theta_configuration",
    "from_edge_list", "generate", "golden_ratio_bound", "grid", "intersection_ratio_bound",
    "least_constant", "lebesgue_ratio", "lemma34_root", "mu_alpha_lower_bound", "mu_alpha_mass",
    "packing_lower_bound", "path", "ratio_profile", "replay_certificate", "separated_balls_bound",
    "snowflake", "spread_bound", "star", "theta_configuration_bound", "tree", "validate_metric",
]
