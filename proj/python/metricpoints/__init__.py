"""Point distributions, equal-measure partitions and ball discrepancies on
compact metric-measure spaces.

The heavy lifting happens in the C++ core; this package re-exports it.
"""

from ._core import (
    ConfigError,
    PreconditionError,
    RadialMeasure,
    Space,
    UnsupportedError,
    __version__,
    bound_report,
    build_box_partition,
    check_distance_invariance,
    discrepancy_report,
    equal_measure_partition,
    exact_invariance_defect,
    l2_discrepancy_r,
    l2_discrepancy_xi,
    lipschitz_check_rho_star,
    list_spaces,
    local_discrepancy,
    make_space,
    mean_rho_star_xi,
    probabilistic_invariance_check,
    sum_distances,
    symdiff_metric_r,
    symdiff_metric_xi,
)

__all__ = [
    "ConfigError",
    "PreconditionError",
    "RadialMeasure",
    "Space",
    "UnsupportedError",
    "__version__",
    "bound_report",
    "build_box_partition",
    "check_distance_invariance",
    "discrepancy_report",
    "equal_measure_partition",
    "exact_invariance_defect",
    "l2_discrepancy_r",
    "l2_discrepancy_xi",
    "lipschitz_check_rho_star",
    "list_spaces",
    "local_discrepancy",
    "make_space",
    "mean_rho_star_xi",
    "probabilistic_invariance_check",
    "sum_distances",
    "symdiff_metric_r",
    "symdiff_metric_xi",
]
