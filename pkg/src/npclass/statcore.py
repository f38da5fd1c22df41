"""Deterministic numerical substrate: special functions, quantiles,
dense symmetric linear algebra, and seeded random streams.

Everything here is pure given its inputs; RngStream is the only stateful
object and is meant to be owned by exactly one consumer.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import DomainError, NumericalError, SingularMatrixError

__all__ = [
    "RngStream",
    "normal_cdf",
    "normal_quantile",
    "student_t_cdf",
    "student_t_quantile",
    "binomial_upper_tail",
    "cholesky",
    "spd_solve",
    "max_eigenvalue",
    "sample_mvn",
]


@dataclass
class RngStream:
    """Reproducible random stream keyed by (seed, stream_id).

    Identical keys give bit-identical sequences regardless of thread
    count; distinct stream_ids give statistically independent streams
    (numpy SeedSequence spawn keys). ``child(i)`` derives a nested
    independent stream, so one top-level seed can drive a whole
    experiment tree deterministically.
    """

    seed: int
    stream_id: int | tuple[int, ...] = 0
    _gen: np.random.Generator | None = field(default=None, repr=False, compare=False)

    def _key(self) -> tuple[int, ...]:
        sid = self.stream_id
        return sid if isinstance(sid, tuple) else (sid,)

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            ss = np.random.SeedSequence(self.seed, spawn_key=self._key())
            self._gen = np.random.Generator(np.random.PCG64(ss))
        return self._gen

    def child(self, index: int) -> "RngStream":
        """Independent sub-stream; deterministic in (self key, index)."""
        return RngStream(self.seed, self._key() + (index,))


def normal_cdf(z: float) -> float:
    """Standard normal CDF, saturating at 0/1 for extreme arguments."""
    return float(special.ndtr(z))


def normal_quantile(p: float) -> float:
    if not 0.0 < p < 1.0:
        raise DomainError(f"normal_quantile needs p in (0,1), got {p}")
    return float(special.ndtri(p))


def student_t_cdf(t: float, df: int) -> float:
    """t CDF via the regularized incomplete beta identity."""
    if df < 1:
        raise DomainError(f"df must be >= 1, got {df}")
    x = df / (df + t * t)
    tail = 0.5 * special.betainc(df / 2.0, 0.5, x)
    return float(tail if t < 0 else 1.0 - tail)


def student_t_quantile(p: float, df: int) -> float:
    """Quantile of the t distribution, by bisection on student_t_cdf.

    The bracket starts at [-50, 50] and doubles until it straddles p,
    which matters for df=1 with small p (the quantile blows up fast).
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"student_t_quantile needs p in (0,1), got {p}")
    if df < 1:
        raise DomainError(f"df must be >= 1, got {df}")
    if p == 0.5:
        return 0.0
    lo, hi = -50.0, 50.0
    while student_t_cdf(lo, df) > p:
        lo *= 2.0
    while student_t_cdf(hi, df) < p:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo < 1e-10 * max(1.0, abs(mid)):
            break
        if student_t_cdf(mid, df) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def binomial_upper_tail(k: int, n: int, q: float) -> float:
    """P(Bin(n, q) >= k), stable for large n.

    Uses the regularized incomplete beta identity
    P(X >= k) = I_q(k, n - k + 1) rather than naive summation.
    """
    if not (1 <= k <= n):
        raise DomainError(f"need 1 <= k <= n, got k={k}, n={n}")
    if not 0.0 <= q <= 1.0:
        raise DomainError(f"q must be in [0,1], got {q}")
    return float(special.betainc(k, n - k + 1, q))


def _check_symmetric(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {m.shape}")
    if not np.allclose(m, m.T, rtol=1e-10, atol=1e-12):
        raise DomainError("matrix is not symmetric")
    return m


def cholesky(m: np.ndarray) -> np.ndarray:
    """Lower-triangular L with L @ L.T = m; raises on non-PD input.

    A factorization whose smallest pivot is at or below
    1e-12 * max(diag) is treated as singular even if LAPACK succeeds.
    """
    m = _check_symmetric(m)
    try:
        lower = np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError("matrix is not positive definite") from exc
    piv = np.diag(lower) ** 2
    if piv.min() <= 1e-12 * max(np.diag(m).max(), 0.0):
        raise SingularMatrixError("matrix is numerically singular (tiny pivot)")
    return lower


def spd_solve(m: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve m @ x = b for symmetric positive definite m."""
    m = _check_symmetric(m)
    b = np.asarray(b, dtype=float)
    lower = cholesky(m)
    y = np.linalg.solve(lower, b)
    x = np.linalg.solve(lower.T, y)
    resid = np.linalg.norm(m @ x - b)
    if resid > 1e-8 * max(np.linalg.norm(b), 1e-300):
        raise SingularMatrixError(
            f"SPD solve residual {resid:.3e} exceeds tolerance; matrix is ill-conditioned"
        )
    return x


def max_eigenvalue(m: np.ndarray, max_iters: int = 10_000) -> float:
    """Largest eigenvalue of a symmetric matrix via power iteration.

    Iterates on m + c*I (c = Gershgorin bound) so the dominant eigenvalue
    is the largest one rather than the largest in magnitude. Convergence
    is tested on the Rayleigh-quotient residual; a shifted restart covers
    the rare case where the two leading eigenvalues nearly tie and the
    first start vector was unlucky.
    """
    m = _check_symmetric(m)
    d = m.shape[0]
    if d == 1:
        return float(m[0, 0])

    shift = float(np.abs(m).sum(axis=1).max()) + 1.0
    rng = np.random.Generator(np.random.PCG64(0x5EED_0F_9E3779B9))

    def run(start: np.ndarray, c: float) -> float | None:
        v = start / np.linalg.norm(start)
        theta = 0.0
        for _ in range(max_iters):
            w = m @ v + c * v
            theta = float(v @ w)
            resid = np.linalg.norm(w - theta * v)
            if resid <= 1e-11 * max(abs(theta), 1.0):
                return theta - c
            nw = np.linalg.norm(w)
            if nw == 0.0:  # m = -c*I exactly
                return theta - c
            v = w / nw
        return None

    out = run(rng.standard_normal(d), shift)
    if out is None:
        out = run(rng.standard_normal(d), 0.5 * shift)
    if out is None:
        raise NumericalError(f"power iteration did not converge in {max_iters} iterations")
    return out


def sample_mvn(
    mean: np.ndarray, chol_factor: np.ndarray, n: int, rng: RngStream
) -> np.ndarray:
    """n i.i.d. draws from N(mean, L @ L.T), rows are observations."""
    mean = np.asarray(mean, dtype=float)
    lower = np.asarray(chol_factor, dtype=float)
    d = mean.shape[0]
    if lower.shape != (d, d):
        raise DomainError(f"chol_factor shape {lower.shape} does not match mean dim {d}")
    if n == 0:
        return np.empty((0, d))
    z = rng.generator.standard_normal((n, d))
    return mean + z @ lower.T
