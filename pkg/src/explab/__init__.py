"""Error-exponent toolkit for discrete memoryless channels.

Computes the exponent family (random-coding, expurgated, sphere-packing,
typical random-coding) and verifies concentration of the error exponent
of pairwise-independent random-code ensembles by Monte Carlo simulation.
"""

from .channel import (
    BhattacharyyaMatrix,
    Channel,
    InputDistribution,
    bhattacharyya_matrix,
    bsc,
    cutoff_rate,
    load_channel_file,
    mutual_information,
    uniform_input,
    validate_channel,
)
from .ensemble import (
    Codebook,
    EnsembleConfig,
    SimulationRun,
    de_caen_lower_bound,
    exact_error_probability,
    min_pairwise_statistic,
    pairwise_exponent,
    run_concentration_experiment,
    sample_codebook,
    second_moment_ratio,
    tail_probability_estimate,
    union_bound_pe,
)
from .exponents import (
    ExponentPoint,
    TrcBranch,
    TrcSolution,
    critical_rate,
    e0_cc,
    e0_iid,
    e_ex,
    e_rce,
    e_sp,
    e_trc,
    e_trc_direct,
    ex_gallager,
)
from .refdist import (
    ReferenceDistribution,
    gauss_q,
    kolmogorov_distance,
    min_gauss_cdf,
    min_gauss_moments,
    min_gauss_pdf,
)
from .typecalc import (
    JointDistribution,
    JointType,
    empirical_joint_type,
    joint_type_enumerate,
    kl_divergence,
    simplex_grid_minimize,
)

__version__ = "0.1.0"
