"""Differentially private and collaborative Kaplan-Meier estimation.

Exact survival representations with lossless conversions, three Laplace
release mechanisms, surrogate dataset reconstruction, a multi-client
collaboration simulator, and the statistical evaluation harness that goes
with them.
"""

from .collab import (
    CollabConfig,
    MonteCarloResult,
    Partition,
    RunResult,
    average_km,
    average_prob,
    make_partition,
    monte_carlo,
    pool_datasets,
    run_path,
    split_even,
    split_uneven,
)
from .dct import dct, idct, truncate
from .mechanisms import (
    DPCountMatrix,
    DPProbability,
    DPSurvival,
    SensitivityMode,
    coefficient_count,
    isotonic_project,
    km_sensitivity,
    prob_sensitivity,
    project_nonincreasing,
)
from .metrics import (
    BootstrapCI,
    ConfidenceBand,
    LogrankResult,
    MetricReport,
    bootstrap_mean_ci,
    calibrated_median_difference,
    evaluate_fidelity,
    greenwood_variance,
    loglog_band,
    logrank,
    median_survival,
    normal_quantile,
    survival_at_fraction,
)
from .rng import NoiseSource, derive_seed, splitmix64
from .surrogate import generate_dataset
from .survival import (
    CountMatrix,
    KaplanMeierEstimator,
    KMCurve,
    ProbMass,
    SurvivalData,
    TimeGrid,
    build_grid,
    count_events,
    counts_to_dataset,
    discretize,
    km_estimate,
    km_to_prob,
    prob_to_km,
)

__version__ = "0.1.0"

__all__ = [
    "BootstrapCI",
    "CollabConfig",
    "ConfidenceBand",
    "CountMatrix",
    "DPCountMatrix",
    "DPProbability",
    "DPSurvival",
    "KaplanMeierEstimator",
    "KMCurve",
    "LogrankResult",
    "MetricReport",
    "MonteCarloResult",
    "NoiseSource",
    "Partition",
    "ProbMass",
    "RunResult",
    "SensitivityMode",
    "SurvivalData",
    "TimeGrid",
    "average_km",
    "average_prob",
    "bootstrap_mean_ci",
    "build_grid",
    "calibrated_median_difference",
    "coefficient_count",
    "count_events",
    "counts_to_dataset",
    "dct",
    "derive_seed",
    "discretize",
    "evaluate_fidelity",
    "generate_dataset",
    "greenwood_variance",
    "idct",
    "isotonic_project",
    "km_estimate",
    "km_sensitivity",
    "km_to_prob",
    "loglog_band",
    "logrank",
    "make_partition",
    "median_survival",
    "monte_carlo",
    "normal_quantile",
    "pool_datasets",
    "prob_sensitivity",
    "prob_to_km",
    "project_nonincreasing",
    "run_path",
    "split_even",
    "split_uneven",
    "splitmix64",
    "survival_at_fraction",
    "truncate",
]
