"""Exact-order soft covering for finite discrete memoryless channels.

Exponents and prefactor orders of the expected relative entropy and total
variation between a random-codebook output distribution and the i.i.d.
target, plus exact oracles and a Monte Carlo simulator to check them.
"""
from ._accel import backend_name
from .channel import (
    DensityMoments,
    DiscreteChannel,
    binary_erasure,
    binary_symmetric,
    build_channel,
    conditional_density_variance,
    density_mgf,
    density_moments,
    information_density,
    is_singular,
    load_channel,
    mutual_information,
    noiseless,
    parse_channel,
    product_channel,
)
from .densitysum import DensitySumDistribution, WindowEvent, convolve_n, exact_window_expectation
from .exponents import (
    ExponentReport,
    TiltedModel,
    ZStatistics,
    alpha_mutual_information,
    build_kl_tilt,
    build_tv_tilt,
    csiszar_alpha_mutual_information,
    exponent_report,
    gallager_tv_one_shot,
    hayashi_kl_upper_exact,
    kl_order,
    solve_rho_star,
    solve_tau_star,
    tilted_kl_upper_order,
    tv_order,
    z_statistics,
)
from .fit import ExperimentConfig, ScalingFit, fit_scaling
from .simulator import (
    Codebook,
    InducedDistribution,
    TrialBatch,
    TStatisticSample,
    estimate_soft_covering,
    estimate_t_functionals,
    exact_kl,
    exact_tv,
    induced_distribution,
    sample_codebook,
    sample_t_statistic,
    thinning_independence_check,
)

__version__ = "0.1.0"
