"""Numerical laboratory for small weighted Bergman spaces on the unit ball.

The package realizes, at desk scale, the objects behind dyadic-weight
function theory on the ball: normalized radial weights and their
halving radii, Carleson boxes and per-annulus box constants, Toeplitz
compressions of positive measures, Berezin transforms, and Schatten
norms with their equivalent integral criteria.  Comparability theorems
become testable two-sided bands; every report carries its truncation
dials and seeds.
"""

from .errors import GridRangeError, PrecisionError
from .weights import (
    DyadicGrid,
    Weight,
    class_s_ratio,
    dyadic_radii,
    moment,
    normalize,
    rho_star,
    s_star_ratio,
    tail,
)
from .geometry import (
    CarlesonBox,
    annulus_index,
    ball_point,
    bergman_ball_radius0,
    bergman_ball_volume,
    bergman_dist,
    delta,
    in_bergman_ball,
    in_carleson_box,
    mobius,
)
from .holo import (
    HoloFunction,
    KernelSeries,
    MultiIndexBasis,
    bergman_norm_sq,
    dyadic_norm_sq,
    h_eval,
    kernel_comparability,
    kernel_diag,
    kernel_diag_band,
    kernel_eval,
    kernel_series,
    pointwise_bound_check,
    test_function_eval,
    test_function_norm_sq,
)
from .measures import (
    AtomicMeasure,
    BallSumMeasure,
    RadialDensityMeasure,
    ball_mass,
    box_mass,
    lambda_density,
    measure_from_json,
    mu_hat,
    pair_integral,
    radial_density_from_weight,
    remark_measure,
    restrict_to_annulus,
    total_mass,
)
from .carleson import CarlesonReport, carleson_profile, hardy_constant
from .toeplitz import (
    ToeplitzMatrix,
    assemble,
    berezin,
    compactness_probe,
    eigenvalues,
    h_transform,
    operator_norm,
    radial_eigenvalues,
)
from .schatten import (
    LpIntegral,
    QuadSpec,
    RemarkReport,
    SchattenReport,
    lp_lambda_integral,
    matched_kmax,
    remark_experiment,
    schatten_norm,
    theorem3_report,
    theorem3_sweep,
)

__version__ = "0.1.0"
