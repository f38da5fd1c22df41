"""Threshold estimators for a fitted score.

Two routes are provided. The order-statistics (umbrella) rule picks the
smallest order k whose violation rate v(k) - the probability that the
resulting classifier's type I error exceeds alpha - is at most delta0,
and thresholds at the k-th smallest left-out class-0 score. The
parametric rule instead builds a high-probability upper bound on the
model-specific optimal cutoff from a t-quantile mean bound and an
eigenvalue-concentration variance bound; it has no minimum sample size
requirement on the left-out class-0 sample.

Classification downstream always uses the strict inequality
score > cutoff, so a point scoring exactly the cutoff goes to class 0
(conservative toward type I error).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, FeasibilityError, NumericalError
from .scoring import PooledMoments, ScoringFunction
from .statcore import (
    binomial_upper_tail,
    max_eigenvalue,
    normal_quantile,
    student_t_quantile,
)

__all__ = [
    "UmbrellaConfig",
    "ThresholdResult",
    "violation_rate",
    "min_class0_size",
    "k_star",
    "k_prime",
    "umbrella_threshold",
    "parametric_threshold",
    "eigenvalue_bound_factor",
]


@dataclass(frozen=True)
class UmbrellaConfig:
    alpha: float
    delta0: float

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must be in (0,1), got {self.alpha}")
        if not 0.0 < self.delta0 < 1.0:
            raise DomainError(f"delta0 must be in (0,1), got {self.delta0}")


@dataclass
class ThresholdResult:
    cutoff: float
    kind: str  # "umbrella" | "parametric"
    # umbrella provenance
    k_star: int | None = None
    n0prime: int | None = None
    violation_bound: float | None = None
    # parametric provenance
    mean_bound: float | None = None
    var_bound: float | None = None
    epsilon: float | None = None


def violation_rate(k: int, n0prime: int, alpha: float) -> float:
    """v(k) = P(Bin(n0', 1 - alpha) >= k); strictly decreasing in k."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must be in (0,1), got {alpha}")
    return binomial_upper_tail(k, n0prime, 1.0 - alpha)


def min_class0_size(alpha: float, delta0: float) -> int:
    """Smallest n0' with (1 - alpha)^n0' <= delta0, i.e. the minimum
    left-out class-0 sample size for which any order can control the
    violation rate at delta0."""
    if not 0.0 < alpha < 1.0 or not 0.0 < delta0 < 1.0:
        raise DomainError("alpha and delta0 must be in (0,1)")
    n = max(1, math.ceil(math.log(delta0) / math.log(1.0 - alpha)))
    # guard against float edge cases of the ceiling
    while (1.0 - alpha) ** n > delta0:
        n += 1
    while n > 1 and (1.0 - alpha) ** (n - 1) <= delta0:
        n -= 1
    return n


def k_star(n0prime: int, alpha: float, delta0: float) -> int:
    """Smallest order k with v(k) <= delta0 (binary search on the
    monotone violation rate)."""
    required = min_class0_size(alpha, delta0)
    if n0prime < required:
        raise FeasibilityError(
            f"insufficient left-out class-0 sample: n0'={n0prime} but the "
            f"violation-rate bound needs n0' >= {required} at alpha={alpha}, delta0={delta0}"
        )
    lo, hi = 1, n0prime  # v(hi) <= delta0 guaranteed by the size check
    if violation_rate(lo, n0prime, alpha) <= delta0:
        return lo
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if violation_rate(mid, n0prime, alpha) <= delta0:
            hi = mid
        else:
            lo = mid
    return hi


def k_prime(n0prime: int, alpha: float, delta0: float) -> tuple[int, int]:
    """Analytic order with the same violation-rate guarantee.

    Returns (raw, clamped): raw is the ceiling of (n0'+1) * A, which can
    land at n0'+1 for small n0'; clamped caps it at n0'. Theory checks
    should use raw only where raw <= n0'.
    """
    if not 0.0 < alpha < 1.0 or not 0.0 < delta0 < 1.0:
        raise DomainError("alpha and delta0 must be in (0,1)")
    if n0prime < 4.0 / (alpha * delta0):
        raise DomainError(
            f"analytic order needs n0' >= 4/(alpha*delta0) = {4.0 / (alpha * delta0):.1f}, "
            f"got {n0prime}"
        )
    m = n0prime + 2
    a_val = (
        1.0
        + 2.0 * delta0 * m * (1.0 - alpha)
        + math.sqrt(1.0 + 4.0 * delta0 * (1.0 - alpha) * alpha * m)
    ) / (2.0 * (delta0 * m + 1.0))
    raw = math.ceil((n0prime + 1) * a_val)
    return raw, min(raw, n0prime)


def umbrella_threshold(
    scores_on_s0prime: np.ndarray, cfg: UmbrellaConfig
) -> ThresholdResult:
    """Cutoff at the k*-th smallest left-out class-0 score."""
    scores = np.asarray(scores_on_s0prime, dtype=float).ravel()
    n0prime = scores.size
    k = k_star(n0prime, cfg.alpha, cfg.delta0)
    cutoff = float(np.sort(scores)[k - 1])  # 1-indexed ascending order statistic
    return ThresholdResult(
        cutoff=cutoff,
        kind="umbrella",
        k_star=k,
        n0prime=n0prime,
        violation_bound=violation_rate(k, n0prime, cfg.alpha),
    )


def eigenvalue_bound_factor(d_eff: int, n: int, epsilon: float) -> float:
    """Multiplier relating the population and pooled-sample top
    eigenvalues: with high probability
    lambda_max(Sigma) <= factor * lambda_max(Sigma_hat).

    Raises FeasibilityError when the concentration denominator is not
    positive (effective dimension too large relative to n).
    """
    if d_eff < 1:
        raise DomainError("effective dimension must be >= 1")
    nm2 = n - 2
    if nm2 <= 0 or d_eff >= nm2:
        raise FeasibilityError(
            f"parametric bound unavailable: d too large relative to n "
            f"(d_eff={d_eff}, n-2={nm2})"
        )
    denom = (1.0 - math.sqrt(d_eff / nm2)) ** 2 - nm2**epsilon / (
        math.sqrt(nm2) * d_eff ** (1.0 / 6.0)
    )
    if denom <= 0.0:
        raise FeasibilityError(
            f"parametric bound unavailable: d too large relative to n "
            f"(d_eff={d_eff}, n-2={nm2}, denominator {denom:.3e})"
        )
    return 1.0 / denom


def parametric_threshold(
    beta: ScoringFunction,
    moments: PooledMoments,
    scores_on_s0prime: np.ndarray,
    cfg: UmbrellaConfig,
    epsilon: float = 1e-3,
) -> ThresholdResult:
    """High-probability upper bound on the oracle cutoff.

    cutoff = sqrt(var_bound) * Phi^{-1}(1 - alpha) + mean_bound, where
    mean_bound is the one-sided t bound on the class-0 score mean and
    var_bound bounds the score variance via the top eigenvalue of the
    pooled covariance. Sparse fits use the support sub-matrix and the
    support cardinality as the effective dimension, which both tightens
    the bound and lifts the d < n - 2 restriction.
    """
    scores = np.asarray(scores_on_s0prime, dtype=float).ravel()
    n0prime = scores.size
    if n0prime < 2:
        raise DomainError(f"parametric threshold needs n0' >= 2, got {n0prime}")

    w_bar = float(scores.mean())
    s_dev = float(scores.std(ddof=1))
    mean_bound = w_bar - student_t_quantile(cfg.delta0, n0prime - 1) * s_dev / math.sqrt(
        n0prime
    )

    n = moments.n0 + moments.n1
    if beta.method == "SLDA":
        support = beta.support
        if support.size == 0:
            raise NumericalError(
                "degenerate score: the sparse fit selected no features, so the "
                "parametric variance bound is undefined"
            )
        sigma_eff = moments.sigma_hat[np.ix_(support, support)]
        beta_eff = beta.beta[support]
        d_eff = support.size
    else:
        sigma_eff = moments.sigma_hat
        beta_eff = beta.beta
        d_eff = beta.d

    factor = eigenvalue_bound_factor(d_eff, n, epsilon)
    var_bound = factor * max_eigenvalue(sigma_eff) * float(beta_eff @ beta_eff)
    if var_bound <= 0.0:
        raise NumericalError("variance bound is not positive")
    cutoff = math.sqrt(var_bound) * normal_quantile(1.0 - cfg.alpha) + mean_bound
    return ThresholdResult(
        cutoff=cutoff,
        kind="parametric",
        mean_bound=mean_bound,
        var_bound=var_bound,
        epsilon=epsilon,
    )
