"""Datasets, class-wise splits, and the Gaussian generative models that
drive the simulation harness.

Generative specs parameterize the discriminant direction (beta = inverse
covariance times mean difference) rather than mu1 directly, since that
is how simulation scenarios are most naturally stated; mu1 is recovered
via mu_from_beta.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .statcore import (
    RngStream,
    cholesky,
    normal_cdf,
    normal_quantile,
    sample_mvn,
    spd_solve,
)

__all__ = [
    "Ar1",
    "CompoundSymmetry",
    "Explicit",
    "CovarianceKind",
    "LabeledDataset",
    "Class0Split",
    "LdaModelSpec",
    "materialize_covariance",
    "mu_from_beta",
    "generate",
    "split_class0",
    "oracle_errors",
]


@dataclass(frozen=True)
class Ar1:
    rho: float

    def matrix(self, d: int) -> np.ndarray:
        if not -1.0 < self.rho < 1.0:
            raise DomainError(f"AR(1) needs |rho| < 1, got {self.rho}")
        idx = np.arange(d)
        return self.rho ** np.abs(idx[:, None] - idx[None, :])


@dataclass(frozen=True)
class CompoundSymmetry:
    rho: float

    def matrix(self, d: int) -> np.ndarray:
        if d > 1 and not (-1.0 / (d - 1) < self.rho < 1.0):
            raise DomainError(
                f"compound symmetry with d={d} needs rho in (-1/(d-1), 1), got {self.rho}"
            )
        return np.full((d, d), self.rho) + (1.0 - self.rho) * np.eye(d)


@dataclass(frozen=True)
class Explicit:
    sigma: np.ndarray

    def matrix(self, d: int) -> np.ndarray:
        sigma = np.asarray(self.sigma, dtype=float)
        if sigma.shape != (d, d):
            raise DomainError(f"explicit covariance shape {sigma.shape}, expected ({d},{d})")
        cholesky(sigma)  # PD check; raises SingularMatrixError otherwise
        return sigma


CovarianceKind = Ar1 | CompoundSymmetry | Explicit


@dataclass
class LabeledDataset:
    """Feature matrix with binary labels; the universal input."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        self.features = np.asarray(self.features, dtype=float)
        self.labels = np.asarray(self.labels)
        if self.features.ndim != 2:
            raise DomainError("features must be a 2-D matrix")
        if self.labels.shape != (self.features.shape[0],):
            raise DomainError("labels length must match feature rows")
        if not np.isin(self.labels, (0, 1)).all():
            raise DomainError("labels must be 0/1")
        if not np.isfinite(self.features).all():
            raise DomainError("features contain non-finite values")

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def class_indices(self, label: int) -> np.ndarray:
        return np.flatnonzero(self.labels == label)

    def class_matrix(self, label: int) -> np.ndarray:
        return self.features[self.labels == label]


@dataclass
class Class0Split:
    """Partition of the class-0 rows: a training part for fitting the
    score and a left-out part for estimating the threshold."""

    train_indices: np.ndarray
    threshold_indices: np.ndarray
    tau: float


@dataclass
class LdaModelSpec:
    """Two Gaussian classes with a common covariance."""

    mu0: np.ndarray
    mu1: np.ndarray
    covariance: CovarianceKind
    pi0: float = 0.5
    _sigma: np.ndarray | None = field(default=None, repr=False, compare=False)
    _chol: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        self.mu0 = np.asarray(self.mu0, dtype=float)
        self.mu1 = np.asarray(self.mu1, dtype=float)
        if self.mu0.shape != self.mu1.shape:
            raise DomainError("mu0 and mu1 must have the same dimension")
        if np.array_equal(self.mu0, self.mu1):
            raise DomainError("mu0 must differ from mu1")
        if not 0.0 < self.pi0 < 1.0:
            raise DomainError(f"pi0 must be in (0,1), got {self.pi0}")

    @property
    def d(self) -> int:
        return self.mu0.shape[0]

    def sigma(self) -> np.ndarray:
        if self._sigma is None:
            self._sigma = materialize_covariance(self)
        return self._sigma

    def chol(self) -> np.ndarray:
        if self._chol is None:
            self._chol = cholesky(self.sigma())
        return self._chol


def materialize_covariance(spec: LdaModelSpec) -> np.ndarray:
    return spec.covariance.matrix(spec.d)


def mu_from_beta(
    beta_bayes: np.ndarray, covariance: np.ndarray, mu0: np.ndarray
) -> np.ndarray:
    """mu1 such that inv(covariance) @ (mu1 - mu0) equals beta_bayes."""
    beta_bayes = np.asarray(beta_bayes, dtype=float)
    covariance = np.asarray(covariance, dtype=float)
    mu0 = np.asarray(mu0, dtype=float)
    if covariance.shape != (beta_bayes.size, beta_bayes.size) or mu0.size != beta_bayes.size:
        raise DomainError("dimension mismatch in mu_from_beta")
    return mu0 + covariance @ beta_bayes


def _sample_class(spec: LdaModelSpec, mu: np.ndarray, n: int, rng: RngStream) -> np.ndarray:
    """Class-conditional draws, with O(n*d) exact samplers for the two
    structured covariances (the generic Cholesky route is O(n*d^2))."""
    if n == 0:
        return np.empty((0, spec.d))
    cov = spec.covariance
    gen = rng.generator
    if isinstance(cov, Ar1):
        z = gen.standard_normal((n, spec.d))
        x = np.empty_like(z)
        x[:, 0] = z[:, 0]
        scale = np.sqrt(1.0 - cov.rho**2)
        for j in range(1, spec.d):
            x[:, j] = cov.rho * x[:, j - 1] + scale * z[:, j]
        return mu + x
    if isinstance(cov, CompoundSymmetry) and cov.rho >= 0.0:
        z = gen.standard_normal((n, spec.d))
        shared = gen.standard_normal((n, 1))
        return mu + np.sqrt(cov.rho) * shared + np.sqrt(1.0 - cov.rho) * z
    return sample_mvn(mu, spec.chol(), n, rng)


def generate(spec: LdaModelSpec, n0: int, n1: int, rng: RngStream) -> LabeledDataset:
    """Draw n0 class-0 and n1 class-1 observations."""
    if n0 < 0 or n1 < 0:
        raise DomainError("sample sizes must be nonnegative")
    x0 = _sample_class(spec, spec.mu0, n0, rng.child(0))
    x1 = _sample_class(spec, spec.mu1, n1, rng.child(1))
    features = np.vstack([x0, x1])
    labels = np.concatenate([np.zeros(n0, dtype=int), np.ones(n1, dtype=int)])
    return LabeledDataset(features, labels)


def split_class0(dataset: LabeledDataset, tau: float, rng: RngStream) -> Class0Split:
    """Uniform random partition of the class-0 rows; size of the training
    part is round-half-up of tau * N0."""
    if not 0.0 < tau < 1.0:
        raise DomainError(f"tau must be in (0,1), got {tau}")
    idx0 = dataset.class_indices(0)
    n0_total = idx0.size
    if n0_total < 2:
        raise DomainError("need at least 2 class-0 observations to split")
    n_train = int(np.floor(tau * n0_total + 0.5))
    if n_train < 1 or n_train >= n0_total:
        raise DomainError(
            f"tau={tau} with N0={n0_total} leaves an empty split side"
        )
    perm = rng.generator.permutation(n0_total)
    train = np.sort(idx0[perm[:n_train]])
    thresh = np.sort(idx0[perm[n_train:]])
    return Class0Split(train_indices=train, threshold_indices=thresh, tau=tau)


def signal_strength(spec: LdaModelSpec) -> float:
    """sqrt(mu_d' inv(Sigma) mu_d), the Mahalanobis separation."""
    mu_d = spec.mu1 - spec.mu0
    return float(np.sqrt(mu_d @ spd_solve(spec.sigma(), mu_d)))


def oracle_errors(spec: LdaModelSpec, alpha: float) -> tuple[float, float]:
    """(type I, type II) errors of the population-level classifier that
    minimizes type II subject to type I <= alpha."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must be in (0,1), got {alpha}")
    delta = signal_strength(spec)
    type2 = normal_cdf(normal_quantile(1.0 - alpha) - delta)
    return alpha, type2
