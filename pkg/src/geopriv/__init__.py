"""Geo-privacy and concentrated geo-privacy mechanisms for point tuples."""

from .accounting import (
    BudgetError,
    BudgetLedger,
    CgpBudget,
    GpBudget,
    RelaxedGpBudget,
    cgp_to_relaxed_gp,
    compose_cgp,
    compose_gp,
    gp_to_cgp,
    matched_gp_budget,
)
from .geometry import (
    PointTuple,
    center,
    diameter,
    dist_1,
    dist_2,
    dist_inf,
    max_radius,
    min_dist,
)
from .hull import ConvexPolygon, convex_hull, directed_excess, jaccard
from .mechanisms import (
    HullResult,
    NonHaltError,
    PchInfo,
    PchParams,
    PnnParams,
    SvtOutcome,
    identity_cgp_inf,
    identity_cgp_l2,
    identity_gp_inf,
    identity_gp_l2,
    kpnn,
    kpnn_gp,
    pch_anchors,
    pch_anchors_detailed,
    pnn,
    pnn_detailed,
    private_convex_hull,
    private_convex_hull_gp,
    svt,
)
from .noise import (
    GenGammaParams,
    RandomStream,
    cgp_radius_quantile,
    gp_radius_quantile,
    lambert_w_exp_inverse,
    laplace_sum_pdf,
    laplace_sum_quantile,
    sample_gaussian_vec,
    sample_gen_gamma,
    sample_laplace,
    sample_planar_laplace,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetError",
    "BudgetLedger",
    "CgpBudget",
    "ConvexPolygon",
    "GenGammaParams",
    "GpBudget",
    "HullResult",
    "NonHaltError",
    "PchInfo",
    "PchParams",
    "PnnParams",
    "PointTuple",
    "RandomStream",
    "RelaxedGpBudget",
    "SvtOutcome",
    "center",
    "cgp_radius_quantile",
    "cgp_to_relaxed_gp",
    "compose_cgp",
    "compose_gp",
    "convex_hull",
    "diameter",
    "directed_excess",
    "dist_1",
    "dist_2",
    "dist_inf",
    "gp_radius_quantile",
    "gp_to_cgp",
    "identity_cgp_inf",
    "identity_cgp_l2",
    "identity_gp_inf",
    "identity_gp_l2",
    "jaccard",
    "kpnn",
    "kpnn_gp",
    "lambert_w_exp_inverse",
    "laplace_sum_pdf",
    "laplace_sum_quantile",
    "matched_gp_budget",
    "max_radius",
    "min_dist",
    "pch_anchors",
    "pch_anchors_detailed",
    "pnn",
    "pnn_detailed",
    "private_convex_hull",
    "private_convex_hull_gp",
    "sample_gaussian_vec",
    "sample_gen_gamma",
    "sample_laplace",
    "sample_planar_laplace",
    "svt",
]
