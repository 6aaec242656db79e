"""BlockRR: a label-DP randomized-response mechanism driven by a label prior."""
__version__ = "0.1.0"

from .core import (
    BetaGamma,
    BlockMapping,
    LabelSpace,
    MechanismMatrix,
    PartitionConfig,
    PriorDistribution,
    RegressionMechanismConfig,
    ValidationResult,
    validate_config,
)
from .errors import BlockRRError, ConfigError, DataError, MalformedMatrixError
from .mechanisms import (
    build_blockrr_matrix,
    build_rr_matrix,
    build_rronbins_matrix,
    build_rrwithprior_matrix,
    closed_form_beta_gamma,
    sample_label,
    sample_labels,
    solve_beta_gamma,
)
from .partition import (
    LabelDataset,
    RandomizedDataset,
    build_pipeline,
    build_weight_matrix,
    partition_from_prior,
    randomize_dataset,
    run_pipeline,
    split_by_weights,
)
from .prior import estimate_prior, noisy_histogram, sample_laplace
from .rng import RandomStream
from .verifier import check_label_dp, check_lp_conditions, check_monotonicity, check_unification
