"""Lower-trimmed Hill statistics for Pareto-type tail-index estimation."""

__version__ = "0.1.0"

from .estimators import (
    LthTrajectory,
    SortedSample,
    averaged_trimmed,
    hill,
    log_excesses,
    lth_trajectory,
    omega_bar,
    theta_weights,
    trimmed_hill,
    upper_trimmed_hill,
    variance_bound,
)
from .ratio import calibrate, ratio_stats, ratio_test, sample_null_ratios, standardized_trajectory
from .samplers import hall_params, parse_spec, quantile, sample
from .special import (
    c_bkp,
    cbar_kp,
    compute_universal_constants,
    conversion_factor,
    exp_integral,
    f_of_p,
    s_function,
    universal_constants,
)
from .threshold import (
    HallParams,
    ThresholdReport,
    convert_to_k0,
    expected_empirical_variance,
    select_k_star,
    select_threshold,
    theoretical_k0_star,
    theoretical_k_star,
)
