"""Linear scoring functions: full discriminant direction in low
dimensions, l1-penalized sparse direction in high dimensions.

The sparse fit minimizes

    (1/n) * sum_i (y_i - b0 - x_i' b)^2 + lambda * sum_j |b_j|

with class-recoded responses y_i = -n/n0 (class 0) and y_i = n/n1
(class 1). Responses have mean zero under this coding, so the intercept
profiles out to b0 = -xbar' b and the solver works on centered (not
standardized) features: the penalty applies to raw-scale coefficients.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import DomainError, NumericalError, SingularMatrixError
from .statcore import RngStream, spd_solve

__all__ = [
    "ScoringFunction",
    "PooledMoments",
    "pooled_moments",
    "fit_lda",
    "fit_slda",
    "select_lambda_cv",
    "default_lambda_grid",
    "lasso_objective",
    "kkt_residual",
]

KKT_TOL = 1e-7
# Fold-SE multiplier for the "sparse" CV selection rule. 1.0 is the
# textbook one-SE rule; 1.5 additionally suppresses the rare folds-noise
# draws where a near-minimum dense penalty sneaks inside the 1-SE band.
CV_SE_FACTOR = 1.5
# fold fits inside cross-validation are scored by 0-1 error of a sign
# rule, which is insensitive to coefficient noise far above this level;
# the fit returned to the caller always meets KKT_TOL
CV_PATH_TOL = 1e-4
MAX_SWEEPS = 10_000


@dataclass
class ScoringFunction:
    """A fitted linear score s(x) = beta' x.

    ``support`` is exact-zero bookkeeping from the solver, never an
    epsilon re-scan. ``intercept`` is the fitted offset of the sparse
    program (kept for the classical sign-rule baseline; the score itself
    is offset-free since thresholds absorb any intercept).
    """

    beta: np.ndarray
    support: np.ndarray
    method: str  # "LDA" | "SLDA"
    lambda_: float | None
    n0: int
    n1: int
    d: int
    intercept: float | None = None

    def __post_init__(self) -> None:
        self.beta = np.asarray(self.beta, dtype=float)
        if not np.isfinite(self.beta).all():
            raise NumericalError("fitted direction contains non-finite values")
        self.support = np.asarray(self.support, dtype=int)

    def score(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.d:
            raise DomainError(f"feature dim {x.shape[1]} does not match model dim {self.d}")
        return x @ self.beta


@dataclass
class PooledMoments:
    """Class means and the pooled covariance with divisor n0 + n1 - 2."""

    mu0_hat: np.ndarray
    mu1_hat: np.ndarray
    sigma_hat: np.ndarray
    n0: int
    n1: int


def pooled_moments(class0: np.ndarray, class1: np.ndarray) -> PooledMoments:
    class0 = np.atleast_2d(np.asarray(class0, dtype=float))
    class1 = np.atleast_2d(np.asarray(class1, dtype=float))
    n0, n1 = class0.shape[0], class1.shape[0]
    if n0 + n1 <= 2:
        raise DomainError(f"pooled covariance needs n0 + n1 > 2, got {n0 + n1}")
    mu0 = class0.mean(axis=0)
    mu1 = class1.mean(axis=0)
    c0 = class0 - mu0
    c1 = class1 - mu1
    sigma = (c0.T @ c0 + c1.T @ c1) / (n0 + n1 - 2)
    sigma = 0.5 * (sigma + sigma.T)
    return PooledMoments(mu0_hat=mu0, mu1_hat=mu1, sigma_hat=sigma, n0=n0, n1=n1)


def fit_lda(moments: PooledMoments) -> ScoringFunction:
    """Dense direction: solve sigma_hat @ beta = mu1_hat - mu0_hat."""
    d = moments.mu0_hat.size
    try:
        beta = spd_solve(moments.sigma_hat, moments.mu1_hat - moments.mu0_hat)
    except SingularMatrixError as exc:
        raise SingularMatrixError(
            f"pooled covariance is singular: LDA requires d < n0+n1-2 "
            f"(d={d}, n0+n1-2={moments.n0 + moments.n1 - 2}) and a well-conditioned matrix"
        ) from exc
    return ScoringFunction(
        beta=beta,
        support=np.arange(d),
        method="LDA",
        lambda_=None,
        n0=moments.n0,
        n1=moments.n1,
        d=d,
    )


@njit(cache=True)
def _cd_sweep(xc, r, beta, lam, col_sq, inv_n2, indices):  # pragma: no cover
    """One pass of cyclic coordinate descent over ``indices``.

    xc is Fortran-ordered centered features, r the current residual
    y - xc @ beta (updated in place). Returns the max coefficient change.
    """
    n = xc.shape[0]
    max_delta = 0.0
    for t in range(indices.shape[0]):
        j = indices[t]
        if col_sq[j] == 0.0:
            continue
        old = beta[j]
        dot = 0.0
        for i in range(n):
            dot += xc[i, j] * r[i]
        c = inv_n2 * dot + inv_n2 * col_sq[j] * old
        a = inv_n2 * col_sq[j]
        if c > lam:
            new = (c - lam) / a
        elif c < -lam:
            new = (c + lam) / a
        else:
            new = 0.0
        diff = new - old
        if diff != 0.0:
            for i in range(n):
                r[i] -= xc[i, j] * diff
            beta[j] = new
            if abs(diff) > max_delta:
                max_delta = abs(diff)
    return max_delta


@njit(cache=True)
def _cd_solve(xc, r, beta, lam, col_sq, tol, max_sweeps):  # pragma: no cover
    """Coordinate descent with an active-set inner loop.

    Returns the number of sweeps used, or -1 if the budget ran out.
    """
    n, d = xc.shape
    inv_n2 = 2.0 / n
    all_idx = np.arange(d)
    sweeps = 0
    while sweeps < max_sweeps:
        delta = _cd_sweep(xc, r, beta, lam, col_sq, inv_n2, all_idx)
        sweeps += 1
        if delta <= tol:
            return sweeps
        active = np.flatnonzero(beta)
        while sweeps < max_sweeps:
            delta = _cd_sweep(xc, r, beta, lam, col_sq, inv_n2, active)
            sweeps += 1
            if delta <= tol:
                break
    return -1


def lasso_objective(xc: np.ndarray, y: np.ndarray, beta: np.ndarray, lam: float) -> float:
    r = y - xc @ beta
    return float(r @ r / xc.shape[0] + lam * np.abs(beta).sum())


def kkt_residual(xc: np.ndarray, y: np.ndarray, beta: np.ndarray, lam: float) -> float:
    """Max violation of the stationarity conditions at beta.

    Zero coordinates require |(2/n) xc_j' r| <= lam; active coordinates
    require (2/n) xc_j' r = lam * sign(beta_j).
    """
    n = xc.shape[0]
    grad = (2.0 / n) * (xc.T @ (y - xc @ beta))
    zero = beta == 0.0
    viol_zero = np.maximum(np.abs(grad[zero]) - lam, 0.0)
    viol_active = np.abs(grad[~zero] - lam * np.sign(beta[~zero]))
    worst = 0.0
    if viol_zero.size:
        worst = max(worst, float(viol_zero.max()))
    if viol_active.size:
        worst = max(worst, float(viol_active.max()))
    return worst


def default_lambda_grid(xc: np.ndarray, y: np.ndarray, size: int = 50) -> np.ndarray:
    """Geometric grid spanning 3 decades down from the smallest lambda
    that zeroes every coefficient."""
    n = xc.shape[0]
    lam_max = float(np.abs(2.0 * (xc.T @ y) / n).max())
    if lam_max == 0.0:
        lam_max = 1.0
    return np.geomspace(lam_max, lam_max * 1e-3, size)


def _recode_responses(n0: int, n1: int) -> np.ndarray:
    n = n0 + n1
    return np.concatenate([np.full(n0, -n / n0), np.full(n1, n / n1)])


def _centered_design(class0: np.ndarray, class1: np.ndarray):
    x = np.vstack([class0, class1])
    xbar = x.mean(axis=0)
    xc = np.asfortranarray(x - xbar)
    return xc, xbar


def _working_set_refine(
    xc: np.ndarray, y: np.ndarray, beta: np.ndarray, lam: float, tol: float,
    gram_full: np.ndarray | None = None, max_iter: int = 60,
) -> bool:
    """Active-set Newton refinement of a near-solution.

    For the coordinates currently active with signs s, the stationarity
    conditions are the linear system X_A' X_A b = X_A' y - (n/2) lam s.
    Solving it exactly removes the slow tail of coordinate descent; sign
    crossings are handled by a truncated step that drops the crossing
    coordinate, and zero-coordinate violations by adding the worst
    offender. Returns True once the KKT residual is within tol; False
    hands control back to coordinate descent.
    """
    n = xc.shape[0]
    for _ in range(max_iter):
        active = np.flatnonzero(beta)
        if active.size == 0:
            grad = (2.0 / n) * (xc.T @ y)
            j = int(np.argmax(np.abs(grad)))
            if abs(grad[j]) <= lam + tol:
                return True
            beta[j] = 1e-300 * np.sign(grad[j])
            continue
        signs = np.sign(beta[active])
        if gram_full is not None:
            gram = gram_full[np.ix_(active, active)]
        else:
            xa = xc[:, active]
            gram = xa.T @ xa
        rhs = xc[:, active].T @ y - 0.5 * n * lam * signs
        try:
            sol = np.linalg.solve(gram, rhs)
            if not np.isfinite(sol).all():
                raise np.linalg.LinAlgError
            scale = max(np.abs(rhs).max(),
                        np.abs(gram).max() * np.abs(sol).max(), 1.0)
            if np.abs(gram @ sol - rhs).max() > 1e-10 * scale:
                sol = np.linalg.lstsq(gram, rhs, rcond=None)[0]
        except np.linalg.LinAlgError:
            sol = np.linalg.lstsq(gram, rhs, rcond=None)[0]
        if not np.isfinite(sol).all():
            return False
        cur = beta[active]
        step = sol - cur
        crossing = sol * signs <= 0.0
        if crossing.any():
            with np.errstate(divide="ignore", invalid="ignore"):
                t_cross = cur[crossing] / (cur[crossing] - sol[crossing])
            t = float(np.clip(np.min(t_cross), 0.0, 1.0))
            moved = cur + t * step
            moved[np.abs(moved) < 1e-14] = 0.0
            drop = np.argmin(t_cross)
            moved[np.flatnonzero(crossing)[drop]] = 0.0
            beta[active] = moved
            continue
        beta[active] = sol
        grad = (2.0 / n) * (xc.T @ (y - xc @ beta))
        viol = np.abs(grad) - lam
        viol[active] = -np.inf
        offenders = np.flatnonzero(viol > tol)
        if offenders.size == 0:
            return True
        if offenders.size > 20:
            offenders = offenders[np.argsort(viol[offenders])[-20:]]
        beta[offenders] = 1e-300 * np.sign(grad[offenders])
    return False


def _solve_lambda(
    xc: np.ndarray,
    y: np.ndarray,
    beta: np.ndarray,
    r: np.ndarray,
    lam: float,
    col_sq: np.ndarray,
    tol: float,
    gram_full: np.ndarray | None = None,
) -> None:
    """Bring (beta, r) to the solution at lam, in place.

    Coordinate descent supplies the right active set quickly; the exact
    working-set solve finishes off the ill-conditioned dense-end cases
    where plain descent zig-zags for thousands of sweeps.
    """
    _cd_solve(xc, r, beta, lam, col_sq, tol, 50)
    resid = kkt_residual(xc, y, beta, lam)
    if resid <= tol:
        return
    for _ in range(40):
        if _working_set_refine(xc, y, beta, lam, tol, gram_full):
            resid = kkt_residual(xc, y, beta, lam)
            if resid <= tol:
                r[:] = y - xc @ beta
                return
        r[:] = y - xc @ beta
        _cd_solve(xc, r, beta, lam, col_sq, tol * 0.1, 20)
        resid = kkt_residual(xc, y, beta, lam)
        if resid <= tol:
            return
    _cd_solve(xc, r, beta, lam, col_sq, tol * 0.01, MAX_SWEEPS)
    resid = kkt_residual(xc, y, beta, lam)
    if resid <= tol:
        return
    raise NumericalError(
        f"lasso solver did not reach KKT tolerance at lambda={lam:g}; "
        f"attained residual {resid:.3e}"
    )


def _solve_path(
    xc: np.ndarray, y: np.ndarray, lams: np.ndarray, tol: float = KKT_TOL
) -> np.ndarray:
    """Warm-started solutions along a decreasing lambda sequence; every
    returned solution carries a KKT residual within tol."""
    d = xc.shape[1]
    col_sq = np.einsum("ij,ij->j", xc, xc)
    # cache the full Gram when the design is small enough that the exact
    # working-set solves dominate; slicing it is then nearly free
    gram_full = xc.T @ xc if d <= 4000 else None
    beta = np.zeros(d)
    r = y.astype(float).copy()
    out = np.empty((lams.size, d))
    for i, lam in enumerate(lams):
        _solve_lambda(xc, y, beta, r, lam, col_sq, tol, gram_full)
        out[i] = beta
    return out


def fit_slda(class0: np.ndarray, class1: np.ndarray, lambda_: float) -> ScoringFunction:
    """Sparse direction at penalty ``lambda_``, warm-started down a
    geometric path for stability."""
    class0 = np.atleast_2d(np.asarray(class0, dtype=float))
    class1 = np.atleast_2d(np.asarray(class1, dtype=float))
    n0, n1 = class0.shape[0], class1.shape[0]
    if n0 < 1 or n1 < 1:
        raise DomainError("both classes need at least one observation")
    if lambda_ < 0:
        raise DomainError(f"lambda must be >= 0, got {lambda_}")
    y = _recode_responses(n0, n1)
    xc, xbar = _centered_design(class0, class1)
    d = xc.shape[1]

    grid = default_lambda_grid(xc, y)
    if lambda_ >= grid[0]:
        beta = np.zeros(d)
    else:
        lams = np.append(grid[grid > lambda_], lambda_)
        beta = _solve_path(xc, y, lams)[-1]
    intercept = float(-xbar @ beta)
    return ScoringFunction(
        beta=beta,
        support=np.flatnonzero(beta),
        method="SLDA",
        lambda_=float(lambda_),
        n0=n0,
        n1=n1,
        d=d,
        intercept=intercept,
    )


def _stratified_folds(n0: int, n1: int, folds: int, rng: RngStream):
    """Round-robin fold assignment within each class, after a shuffle.

    Yields (train0, train1, val0, val1) row-index arrays into the
    class-0 and class-1 matrices respectively.
    """
    gen = rng.generator
    order0 = gen.permutation(n0)
    order1 = gen.permutation(n1)
    for k in range(folds):
        val0 = np.sort(order0[k::folds])
        val1 = np.sort(order1[k::folds])
        train0 = np.setdiff1d(np.arange(n0), val0)
        train1 = np.setdiff1d(np.arange(n1), val1)
        yield train0, train1, val0, val1


def select_lambda_cv(
    class0: np.ndarray,
    class1: np.ndarray,
    folds: int = 5,
    grid: np.ndarray | None = None,
    rng: RngStream | None = None,
    rule: str = "min",
) -> float:
    """Penalty minimizing cross-validated 0-1 error of the fitted sign
    rule; ties resolve to the larger (sparser) lambda.

    With ``rule="sparse"`` the largest penalty whose mean CV error stays
    within ``CV_SE_FACTOR`` fold-standard-errors of the minimum is
    returned instead (a one-standard-error-style rule). The CV objective
    is often nearly flat around its argmin, and fold noise can then push
    the argmin to a much denser model; the sparse rule trades a
    statistically negligible amount of CV error for the sparsest model
    inside the noise band, which matters for downstream procedures whose
    guarantees degrade with support size."""
    if rule not in ("min", "sparse"):
        raise DomainError(f"unknown CV rule {rule!r} (expected 'min' or 'sparse')")
    grid, fold_errors = _cv_fold_errors(class0, class1, folds, grid, rng)
    return _apply_cv_rule(grid, fold_errors, rule)


def _cv_fold_errors(
    class0: np.ndarray,
    class1: np.ndarray,
    folds: int = 5,
    grid: np.ndarray | None = None,
    rng: RngStream | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Stratified-CV 0-1 error of the sign rule at every grid penalty.

    Returns the grid and a (folds, grid) matrix of per-fold validation
    error rates, so that several selection rules can be applied to a
    single CV pass."""
    class0 = np.atleast_2d(np.asarray(class0, dtype=float))
    class1 = np.atleast_2d(np.asarray(class1, dtype=float))
    n0, n1 = class0.shape[0], class1.shape[0]
    if folds < 2:
        raise DomainError("need at least 2 folds")
    if n0 < folds or n1 < folds:
        raise DomainError(
            f"stratified {folds}-fold CV needs >= {folds} observations per class "
            f"(got n0={n0}, n1={n1})"
        )
    if rng is None:
        rng = RngStream(0, (0xCF,))
    if grid is None:
        y_full = _recode_responses(n0, n1)
        xc_full, _ = _centered_design(class0, class1)
        grid = default_lambda_grid(xc_full, y_full)
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise DomainError("lambda grid is empty")
    if grid.size > 1 and not np.all(np.diff(grid) < 0):
        raise DomainError("lambda grid must be strictly decreasing")

    fold_errors = np.zeros((folds, grid.size))
    for k, (train0, train1, val0, val1) in enumerate(
        _stratified_folds(n0, n1, folds, rng)
    ):
        c0, c1 = class0[train0], class1[train1]
        y = _recode_responses(len(train0), len(train1))
        xc, xbar = _centered_design(c0, c1)
        betas = _solve_path(xc, y, grid, tol=CV_PATH_TOL)
        xval = np.vstack([class0[val0], class1[val1]])
        yval = np.concatenate([np.zeros(len(val0)), np.ones(len(val1))])
        for i in range(grid.size):
            b0 = -xbar @ betas[i]
            pred = (xval @ betas[i] + b0 > 0).astype(float)
            fold_errors[k, i] = float(np.mean(pred != yval))
    return grid, fold_errors


def _apply_cv_rule(grid: np.ndarray, fold_errors: np.ndarray, rule: str) -> float:
    """Pick a penalty from a (folds, grid) CV error matrix.

    ``"min"`` is the plain argmin of the mean error (ties go to the
    larger penalty because the grid is decreasing); ``"sparse"`` keeps
    the largest penalty whose mean error is within CV_SE_FACTOR standard
    errors of the minimum, where the standard error is the fold spread
    at the argmin divided by sqrt(folds)."""
    mean = fold_errors.mean(axis=0)
    i_min = int(np.argmin(mean))
    if rule == "min":
        return float(grid[i_min])
    se = float(fold_errors[:, i_min].std(ddof=1)) / math.sqrt(fold_errors.shape[0])
    i_sel = int(np.flatnonzero(mean <= mean[i_min] + CV_SE_FACTOR * se)[0])
    return float(grid[i_sel])
