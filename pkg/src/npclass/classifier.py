"""Assembly of the classifiers: four type-I-error-controlling variants
(score in {dense LDA, sparse LDA} x threshold in {umbrella, parametric})
plus the classical sparse-LDA sign rule as a baseline, adaptive
split-proportion selection, majority voting, and evaluation.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .data import Class0Split, LabeledDataset, LdaModelSpec, signal_strength, split_class0
from .errors import DomainError, FeasibilityError
from .scoring import (
    ScoringFunction,
    fit_lda,
    fit_slda,
    pooled_moments,
    select_lambda_cv,
)
from .statcore import RngStream, normal_quantile, spd_solve
from .thresholding import (
    ThresholdResult,
    UmbrellaConfig,
    min_class0_size,
    parametric_threshold,
    umbrella_threshold,
)

__all__ = [
    "NpMethod",
    "TrainOptions",
    "NpClassifier",
    "VotingClassifier",
    "ErrorPair",
    "train",
    "predict",
    "evaluate",
    "adaptive_tau",
    "train_voting",
    "np_oracle",
    "model_to_json",
    "model_from_json",
]

TAU_GRID = tuple(round(0.1 * i, 1) for i in range(1, 10))


class NpMethod(enum.Enum):
    NP_LDA = "np-lda"
    NP_SLDA = "np-slda"
    PNP_LDA = "pnp-lda"
    PNP_SLDA = "pnp-slda"
    CLASSIC_SLDA = "slda"

    @property
    def sparse(self) -> bool:
        return self in (NpMethod.NP_SLDA, NpMethod.PNP_SLDA, NpMethod.CLASSIC_SLDA)

    @property
    def umbrella(self) -> bool:
        return self in (NpMethod.NP_LDA, NpMethod.NP_SLDA)

    @property
    def parametric(self) -> bool:
        return self in (NpMethod.PNP_LDA, NpMethod.PNP_SLDA)

    @property
    def cv_rule(self) -> str:
        # The parametric threshold's variance bound grows quickly with
        # the selected support, so the sparse parametric method prefers
        # the sparsest penalty within the CV noise band of the minimum;
        # the other sparse methods keep the plain argmin.
        return "sparse" if self is NpMethod.PNP_SLDA else "min"


@dataclass
class TrainOptions:
    """Knobs shared by every method.

    lambda_ = None means the sparse penalty is chosen by stratified CV;
    a float bypasses CV. epsilon enters the parametric variance bound.
    """

    lambda_: float | None = None
    cv_folds: int = 5
    epsilon: float = 1e-3


@dataclass
class NpClassifier:
    score: ScoringFunction
    threshold: ThresholdResult
    method: NpMethod
    alpha: float | None
    delta0: float | None
    tau: float | None

    def predict(self, x: np.ndarray) -> np.ndarray:
        # strict inequality: a point scoring exactly the cutoff is class 0
        return (self.score.score(x) > self.threshold.cutoff).astype(int)


@dataclass
class VotingClassifier:
    members: list[NpClassifier]
    method: NpMethod

    def __post_init__(self) -> None:
        if len(self.members) % 2 == 0:
            raise DomainError("number of voting members must be odd")

    def predict(self, x: np.ndarray) -> np.ndarray:
        votes = np.sum([m.predict(x) for m in self.members], axis=0)
        return (votes * 2 > len(self.members)).astype(int)


@dataclass(frozen=True)
class ErrorPair:
    type1: float
    type2: float


def _fit_score(
    class0: np.ndarray,
    class1: np.ndarray,
    method: NpMethod,
    options: TrainOptions,
    rng: RngStream,
) -> ScoringFunction:
    if method.sparse:
        lam = options.lambda_
        if lam is None:
            lam = select_lambda_cv(class0, class1, folds=options.cv_folds,
                                   rng=rng, rule=method.cv_rule)
        return fit_slda(class0, class1, lam)
    return fit_lda(pooled_moments(class0, class1))


def _check_umbrella_feasible(n0prime: int, alpha: float, delta0: float) -> None:
    required = min_class0_size(alpha, delta0)
    if n0prime < required:
        raise FeasibilityError(
            f"left-out class-0 sample size {n0prime} is below the minimum {required} "
            f"required at alpha={alpha}, delta0={delta0}"
        )


def train(
    dataset: LabeledDataset,
    method: NpMethod,
    alpha: float,
    delta0: float,
    tau: float,
    rng: RngStream,
    options: TrainOptions | None = None,
    split: Class0Split | None = None,
) -> NpClassifier:
    """Train one classifier: split class 0 by tau, fit the score on the
    training part plus all of class 1, then estimate the threshold from
    the left-out class-0 scores under the method's rule.

    The classical baseline ignores (alpha, delta0, tau) and thresholds
    at the fitted sign rule's natural cut. A pre-made split may be
    passed to share one split across methods.
    """
    options = options or TrainOptions()
    class1 = dataset.class_matrix(1)
    if class1.shape[0] == 0 or dataset.class_indices(0).size == 0:
        raise DomainError("both classes must be present in the training data")

    if method is NpMethod.CLASSIC_SLDA:
        class0 = dataset.class_matrix(0)
        score = _fit_score(class0, class1, method, options, rng.child(0))
        cut = ThresholdResult(cutoff=float(-score.intercept), kind="sign-rule")
        return NpClassifier(score=score, threshold=cut, method=method,
                            alpha=None, delta0=None, tau=None)

    if split is None:
        split = split_class0(dataset, tau, rng.child(1))
    n0prime = split.threshold_indices.size
    if method.umbrella:
        _check_umbrella_feasible(n0prime, alpha, delta0)

    class0_train = dataset.features[split.train_indices]
    score = _fit_score(class0_train, class1, method, options, rng.child(0))
    scores_left_out = score.score(dataset.features[split.threshold_indices])

    cfg = UmbrellaConfig(alpha=alpha, delta0=delta0)
    if method.umbrella:
        threshold = umbrella_threshold(scores_left_out, cfg)
    else:
        moments = pooled_moments(class0_train, class1)
        threshold = parametric_threshold(
            score, moments, scores_left_out, cfg, epsilon=options.epsilon
        )
    return NpClassifier(score=score, threshold=threshold, method=method,
                        alpha=alpha, delta0=delta0, tau=split.tau)


def predict(clf: NpClassifier | VotingClassifier, x: np.ndarray) -> np.ndarray:
    return clf.predict(x)


def evaluate(clf, test: LabeledDataset) -> ErrorPair:
    """Class-conditional misclassification frequencies on a test set."""
    idx0 = test.class_indices(0)
    idx1 = test.class_indices(1)
    if idx0.size == 0 or idx1.size == 0:
        raise DomainError("test set must contain both classes")
    pred0 = clf.predict(test.features[idx0])
    pred1 = clf.predict(test.features[idx1])
    return ErrorPair(type1=float(np.mean(pred0 == 1)), type2=float(np.mean(pred1 == 0)))


def adaptive_tau(
    dataset: LabeledDataset,
    method: NpMethod,
    alpha: float,
    delta0: float,
    folds: int = 5,
    rng: RngStream | None = None,
    options: TrainOptions | None = None,
    tau_grid: tuple[float, ...] = TAU_GRID,
) -> tuple[float, dict[float, float]]:
    """Pick the class-0 split proportion by K-fold cross-validated type
    II error over the candidate grid.

    Class 1 is folded; each fold trains on all class-0 rows (freshly
    split by tau) plus the remaining class-1 folds and validates its
    type II error on the held-out class-1 fold. Proportions whose
    left-out class-0 size fails the umbrella minimum are skipped rather
    than failing the search. Ties resolve to the smaller tau.
    """
    if folds < 2:
        raise DomainError("need at least 2 folds")
    rng = rng or RngStream(0, (0xAD,))
    options = options or TrainOptions()
    idx1 = dataset.class_indices(1)
    if idx1.size < folds:
        raise DomainError(f"class-1 count {idx1.size} is below the fold count {folds}")
    n0_total = dataset.class_indices(0).size
    required = min_class0_size(alpha, delta0) if method.umbrella else 1

    perm1 = rng.child(0).generator.permutation(idx1.size)
    e_curve: dict[float, float] = {}
    for t_i, tau in enumerate(tau_grid):
        n_train = int(math.floor(tau * n0_total + 0.5))
        if n_train < 1 or n0_total - n_train < required:
            continue  # infeasible proportion, recorded as unavailable
        fold_errors = []
        for k in range(folds):
            val_rows = idx1[np.sort(perm1[k::folds])]
            train1_rows = idx1[np.sort(np.delete(perm1, np.arange(k, idx1.size, folds)))]
            sub = LabeledDataset(
                np.vstack([dataset.class_matrix(0), dataset.features[train1_rows]]),
                np.concatenate([np.zeros(n0_total, dtype=int),
                                np.ones(train1_rows.size, dtype=int)]),
            )
            clf = train(sub, method, alpha, delta0, tau,
                        rng.child(1 + t_i * folds + k), options)
            pred = clf.predict(dataset.features[val_rows])
            fold_errors.append(float(np.mean(pred == 0)))
        e_curve[tau] = float(np.mean(fold_errors))
    if not e_curve:
        raise FeasibilityError(
            "no feasible split proportion: every tau leaves the left-out class-0 "
            f"sample below the minimum size {required}"
        )
    tau_min = min(e_curve, key=lambda t: (e_curve[t], t))
    return tau_min, e_curve


def train_voting(
    dataset: LabeledDataset,
    method: NpMethod,
    alpha: float,
    delta0: float,
    tau: float,
    m: int,
    rng: RngStream,
    options: TrainOptions | None = None,
) -> VotingClassifier:
    """m classifiers on m independent class-0 splits; prediction is the
    majority vote (strict, since m is odd)."""
    if m < 1 or m % 2 == 0:
        raise DomainError(f"m must be odd and >= 1, got {m}")
    members = [
        train(dataset, method, alpha, delta0, tau, rng.child(i), options)
        for i in range(m)
    ]
    return VotingClassifier(members=members, method=method)


def np_oracle(spec: LdaModelSpec, alpha: float) -> NpClassifier:
    """Population-level classifier: direction inv(Sigma) @ (mu1 - mu0)
    thresholded so its exact type I error equals alpha."""
    sigma = spec.sigma()
    mu_d = spec.mu1 - spec.mu0
    beta = spd_solve(sigma, mu_d)
    cutoff = signal_strength(spec) * normal_quantile(1.0 - alpha) + float(beta @ spec.mu0)
    score = ScoringFunction(
        beta=beta, support=np.flatnonzero(beta), method="LDA",
        lambda_=None, n0=0, n1=0, d=spec.d,
    )
    return NpClassifier(
        score=score,
        threshold=ThresholdResult(cutoff=cutoff, kind="oracle"),
        method=NpMethod.NP_LDA,
        alpha=alpha,
        delta0=None,
        tau=None,
    )


def model_to_json(clf: NpClassifier) -> str:
    """Serialize to the fixed JSON schema. Floats use repr, which is the
    shortest decimal that round-trips exactly (never more than 17
    significant digits)."""
    doc = {
        "method": clf.method.value,
        "alpha": clf.alpha,
        "delta0": clf.delta0,
        "tau": clf.tau,
        "beta": [float(b) for b in clf.score.beta],
        "cutoff": float(clf.threshold.cutoff),
        "threshold_kind": clf.threshold.kind,
        "meta": {
            "score_method": clf.score.method,
            "lambda": clf.score.lambda_,
            "n0": clf.score.n0,
            "n1": clf.score.n1,
            "d": clf.score.d,
            "support": [int(j) for j in clf.score.support],
            "intercept": clf.score.intercept,
            "k_star": clf.threshold.k_star,
            "n0prime": clf.threshold.n0prime,
            "violation_bound": clf.threshold.violation_bound,
            "mean_bound": clf.threshold.mean_bound,
            "var_bound": clf.threshold.var_bound,
            "epsilon": clf.threshold.epsilon,
        },
    }
    return json.dumps(doc, indent=2)


def model_from_json(text: str) -> NpClassifier:
    doc = json.loads(text)
    meta = doc["meta"]
    score = ScoringFunction(
        beta=np.asarray(doc["beta"], dtype=float),
        support=np.asarray(meta["support"], dtype=int),
        method=meta["score_method"],
        lambda_=meta["lambda"],
        n0=meta["n0"],
        n1=meta["n1"],
        d=meta["d"],
        intercept=meta["intercept"],
    )
    threshold = ThresholdResult(
        cutoff=float(doc["cutoff"]),
        kind=doc["threshold_kind"],
        k_star=meta["k_star"],
        n0prime=meta["n0prime"],
        violation_bound=meta["violation_bound"],
        mean_bound=meta["mean_bound"],
        var_bound=meta["var_bound"],
        epsilon=meta["epsilon"],
    )
    return NpClassifier(
        score=score,
        threshold=threshold,
        method=NpMethod(doc["method"]),
        alpha=doc["alpha"],
        delta0=doc["delta0"],
        tau=doc["tau"],
    )
