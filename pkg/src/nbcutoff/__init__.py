"""Non-backtracking walks on configuration-model multigraphs.

Exact mixing curves, Gaussian cutoff-window predictions, annealed coupling
experiments, exposure forests and pair-sum concentration — built on plain
numpy with deterministic, seedable randomness throughout.
"""

from .degrees import (
    CutoffPrediction,
    DegreeSequence,
    DegreeStats,
    cutoff_prediction,
    degrees_from_counts,
    gaussian_quantile,
    gaussian_tail,
    load_degrees,
    sample_iid_degrees,
    save_degrees,
    sparsity_report,
    stats,
    validate,
)
from .errors import NbcutoffError
from .pairing import (
    BallReport,
    GraphSummary,
    HalfEdgeSpace,
    Pairing,
    build_graph,
    complete_uniformly,
    default_ball_radius,
    directed_ball,
    enumerate_pairings,
    is_root,
    load_pairing,
    non_root_mass,
    pair_on_demand,
    root_mask,
    save_pairing,
    uniform_pairing,
)
from .walks import (
    Distribution,
    TvCurve,
    default_starts,
    distribution_at,
    mixing_time,
    point_mass,
    step,
    tv_curve,
    tv_distance,
    uniform_distribution,
    verify_symmetry,
    walk,
    walk_endpoints,
)
from .coupling import (
    AnnealedRun,
    LogWeightSample,
    annealed_walk,
    berry_esseen_check,
    failure_cdf_experiment,
    iid_log_weight,
    iid_log_weights,
    lower_bound_estimate,
)
from .exposure import (
    ExposureResult,
    TruncatedSums,
    completion_estimate,
    concentration_experiment,
    default_min_weight,
    default_truncation,
    exhaustive_lower_tail,
    pairing_weight_sum,
    run_exposure,
    switch,
    switch_delta,
    truncated_sums,
)
from .rng import stream

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
