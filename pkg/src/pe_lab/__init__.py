"""Differentially private synthetic data over convex compact domains.

Building blocks: ball/box geometry, discrete measures and nearest-neighbor
histograms, exact 1-Wasserstein and bounded-Lipschitz optimization via an
internal network simplex, Gaussian/Laplace privacy mechanisms with exact
calibration, the evolution loops, a one-shot grid signed-measure mechanism,
closed-form parameter calculators, and a seeded experiment harness.
"""
from .geometry import Ball, Box, Domain, distance
from .measures import (
    DiscreteMeasure,
    empirical,
    load_dataset_csv,
    nn_histogram,
    sample_with_replacement,
)
from .transport import (
    BlDecomposition,
    SolverError,
    TransportPlan,
    bl_norm,
    bl_project_simplex,
    min_w1_over_simplex,
    w1_exact,
    w1_objective_for_simplex_weights,
)
from .privacy import (
    Mechanism,
    NoisyHistogram,
    PrivacyParams,
    gaussian_perturb,
    gaussian_threshold_renormalize,
    laplace_threshold_histogram,
    sigma_analytic_gaussian,
    sigma_for_composition,
)
from .apis import (
    CopyInit,
    GammaVAlphaContract,
    InterpolateInit,
    PointMassInit,
    SingleScaleGaussianApi,
    UniformInit,
    VariationApiSpec,
    contraction_estimate,
    random_api,
    variation_api,
    variation_api_dataset,
)
from .evolution import (
    BlProjection,
    LaplaceThreshold,
    PeConfig,
    RunTrace,
    SensitiveDataset,
    ThresholdRenormalize,
    evaluate_gamma_contraction,
    pe_prior_theoretical_run,
    pe_run,
)
from .psmm import PartitionSpec, grid_partition, psmm_as_nn_histogram, psmm_measure, psmm_run
from .hyperparams import (
    ParameterError,
    RunParams,
    TheoremParams,
    gamma_of_d,
    gaussian_complexity_bound,
    run_params,
    t_heuristic,
    theorem2_params,
)
from .experiments import build_scenario, list_scenarios, run_scenario

__version__ = "0.1.0"
