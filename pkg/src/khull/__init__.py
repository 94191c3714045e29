"""Hulls with respect to a convex body, family f-vectors, and zero cells
of Poisson hyperplane tessellations, with the quadrature formulas and
Monte Carlo experiments that tie them together."""

from .body import (Ball, ConvexBody, Ellipsoid, PNormBall, Polytope,
                   SurfaceMeasureSampler, direction_grid, kappa, sphere_area,
                   uniform_sample)
from .errors import (ConfigError, DomainError, GeneralPositionError,
                     GeneralPositionWarning, KhullError, NumericError,
                     UnsupportedKindError)
from .hull import (Arc, ArcBoundary, ArcVertex, DegeneracyWitness,
                   IntersectionBody, MembershipVerdict, disk_intersection_boundary,
                   khull_boundary_2d, khull_contains, mink_diff_contains)
from .faces import (FVector, GeneralPositionReport, TaggedPolytope,
                    fvector_approx, fvector_bound_ok, fvector_exact_2d,
                    fvector_from_tagged_hull, general_position_check_2d,
                    kfacet_count_2d, owner_tagged_hull, polar_family,
                    polytope_fvector, tagged_hull_from_points)
from .tessellation import (HyperplaneSample, IntrinsicVolumes,
                           ScaledSampleStatistics, ZeroCell, intrinsic_volumes,
                           intrinsic_volumes_of_cell, sample_hyperplanes,
                           scaled_sample_statistics, zero_cell)
from .formulas import (ExpectationEstimate, QuadratureSpec, ef0_general,
                       ef0_symmetric, halfspace_determinant_integral,
                       projection_body_support, volume_polar_radial)
from .experiments import (EXPERIMENTS, ExperimentConfig, body_from_spec,
                          load_config, run_experiment, summarize)

__version__ = "0.1.0"

__all__ = [
    "Arc", "ArcBoundary", "ArcVertex", "Ball", "ConfigError", "ConvexBody",
    "DegeneracyWitness", "DomainError", "EXPERIMENTS", "Ellipsoid",
    "ExpectationEstimate", "ExperimentConfig", "FVector",
    "GeneralPositionError", "GeneralPositionReport", "GeneralPositionWarning",
    "HyperplaneSample", "IntersectionBody", "IntrinsicVolumes", "KhullError",
    "MembershipVerdict", "NumericError", "PNormBall", "Polytope",
    "QuadratureSpec", "ScaledSampleStatistics", "SurfaceMeasureSampler",
    "TaggedPolytope", "UnsupportedKindError", "ZeroCell", "body_from_spec",
    "direction_grid", "disk_intersection_boundary", "ef0_general",
    "ef0_symmetric", "fvector_approx", "fvector_bound_ok", "fvector_exact_2d",
    "fvector_from_tagged_hull", "general_position_check_2d",
    "halfspace_determinant_integral", "intrinsic_volumes",
    "intrinsic_volumes_of_cell", "kappa", "kfacet_count_2d",
    "khull_boundary_2d", "khull_contains", "load_config", "mink_diff_contains",
    "owner_tagged_hull", "polar_family", "polytope_fvector", "run_experiment",
    "sample_hyperplanes", "scaled_sample_statistics", "sphere_area",
    "summarize", "tagged_hull_from_points", "uniform_sample", "volume_polar_radial",
    "zero_cell",
]
