"""
ridgeprox - sums of two ridge functions on finite point sets: path calculus,
minimax fitting and proximinality diagnostics
"""

__version__ = "0.1.0"

from .approx import (  # noqa: E402
    ApproxResult,
    MatchRate,
    RidgeSum,
    ScalarField,
    VariationReport,
    alternating_algorithm,
    best_closed_path,
    certificate_match_rate,
    closed_path_functional,
    interpolate_on_path,
    minimax_fit,
    variation,
    variation_inequality_report,
)
from .geometry import Direction, FiberPartition, PointSet, ToleranceParams, complete_basis, fibers, project  # noqa: E402
from .paths import (  # noqa: E402
    ClosedPathCertificate,
    OrbitPartition,
    Path,
    StepKind,
    enumerate_closed_paths,
    irreducible_bound,
    orbits,
    relation_graph,
    shortest_alternating_path,
    validate_path,
)
