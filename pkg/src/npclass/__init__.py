"""Binary classification with a distribution-level cap on type I error.

The classifiers fit a (possibly sparse) linear discriminant score, then
place the decision cutoff using a held-out portion of the class-0 sample
so that the population type I error stays below a user-chosen alpha with
probability at least 1 - delta0. Two cutoff constructions are provided:
a distribution-free order-statistic rule and a Gaussian-model bound that
needs far fewer held-out points.
"""
from .classifier import (
    ErrorPair,
    NpClassifier,
    NpMethod,
    TrainOptions,
    VotingClassifier,
    adaptive_tau,
    evaluate,
    model_from_json,
    model_to_json,
    np_oracle,
    train,
    train_voting,
)
from .data import (
    Ar1,
    Class0Split,
    CompoundSymmetry,
    Explicit,
    LabeledDataset,
    LdaModelSpec,
    generate,
    mu_from_beta,
    oracle_errors,
    signal_strength,
    split_class0,
)
from .errors import (
    DomainError,
    FeasibilityError,
    NpClassError,
    NumericalError,
    SingularMatrixError,
)
from .experiments import (
    ExperimentSpec,
    Setting,
    preset,
    preset_ids,
    run_eigenbound_study,
    run_experiment,
    run_split_study,
)
from .scoring import (
    ScoringFunction,
    default_lambda_grid,
    fit_lda,
    fit_slda,
    pooled_moments,
    select_lambda_cv,
)
from .statcore import RngStream
from .thresholding import (
    ThresholdResult,
    UmbrellaConfig,
    k_prime,
    k_star,
    min_class0_size,
    parametric_threshold,
    umbrella_threshold,
    violation_rate,
)

__version__ = "1.0.0"

__all__ = [
    "Ar1",
    "Class0Split",
    "CompoundSymmetry",
    "DomainError",
    "ErrorPair",
    "Explicit",
    "ExperimentSpec",
    "FeasibilityError",
    "LabeledDataset",
    "LdaModelSpec",
    "NpClassError",
    "NpClassifier",
    "NpMethod",
    "NumericalError",
    "RngStream",
    "ScoringFunction",
    "Setting",
    "SingularMatrixError",
    "ThresholdResult",
    "TrainOptions",
    "UmbrellaConfig",
    "VotingClassifier",
    "adaptive_tau",
    "default_lambda_grid",
    "evaluate",
    "fit_lda",
    "fit_slda",
    "generate",
    "k_prime",
    "k_star",
    "min_class0_size",
    "model_from_json",
    "model_to_json",
    "mu_from_beta",
    "np_oracle",
    "oracle_errors",
    "parametric_threshold",
    "pooled_moments",
    "preset",
    "preset_ids",
    "run_eigenbound_study",
    "run_experiment",
    "run_split_study",
    "select_lambda_cv",
    "signal_strength",
    "split_class0",
    "train",
    "train_voting",
    "umbrella_threshold",
    "violation_rate",
]
