"""Bandwidth selectors: Jacobian control, Silverman, CV, and seeded CV.

The Jacobian selector controls a closed-form proxy for the norm of the
derivative of the fitted function. The proxy factors as

    j_a(sigma) = 1 / sigma
    j_b(sigma) = 1 / (n * exp(-(((n-1)^(1/p) - 1) * pi * sigma / (2 l_max))^2) + lambda)

j_a tracks how fast the kernel decays away from the data, j_b lower-bounds
the spectral norm of the inverse regularized kernel matrix, and their product
is the proxy being minimized. Its stationary points have the closed form

    sigma_k = (sqrt(2)/pi) * l_max / ((n-1)^(1/p) - 1)
              * sqrt(1 - 2 W_k(-lambda sqrt(e) / (2n)))

on the two real Lambert W branches: k = 0 gives the local minimum that the
selector returns, k = -1 the local maximum. Real solutions exist only for
lambda <= 2 n e^(-3/2); above that threshold the proxy is monotone decreasing
and the selector clamps lambda to the threshold.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset, make_kfold
from .kernel import kernel_matrix, max_pairwise_distance
from .lambertw import NEGATIVE, PRINCIPAL, lambert_w
from .linalg import FactorizationError, factor_spd, solve

METHOD_JACOBIAN = "jacobian"
METHOD_SILVERMAN = "silverman"
METHOD_CV = "cv"
METHOD_SEEDED_CV = "seeded-cv"
METHODS = (METHOD_JACOBIAN, METHOD_SILVERMAN, METHOD_CV, METHOD_SEEDED_CV)

DEFAULT_GRID_MIN = 0.01
DEFAULT_GRID_SIZE = 100
DEFAULT_FOLDS = 10


class Regime(enum.Enum):
    """Shape of the Jacobian proxy as a function of sigma, fixed by lambda."""

    NO_REGULARIZATION = "no-regularization"  # lambda = 0: global minimum
    LOCAL_MINIMUM = "local-minimum"  # 0 < lambda <= threshold: local min + max
    MONOTONE = "monotone"  # lambda > threshold: strictly decreasing


def lambda_threshold(n: int) -> float:
    """Largest lambda for which the stationary bandwidths exist: 2 n e^(-3/2)."""
    return 2.0 * n * math.exp(-1.5)


def classify_regime(n: int, lam: float) -> Regime:
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    if lam == 0.0:
        return Regime.NO_REGULARIZATION
    if lam <= lambda_threshold(n):
        return Regime.LOCAL_MINIMUM
    return Regime.MONOTONE


@dataclass(frozen=True)
class JacobianParams:
    """(n, p, l_max, lambda): everything the Jacobian proxy depends on."""

    n: int
    p: int
    l_max: float
    lam: float

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"need n >= 3 (the proxy denominator vanishes at n = 2), got {self.n}")
        if self.p < 1:
            raise ValueError(f"need p >= 1, got {self.p}")
        if not (np.isfinite(self.l_max) and self.l_max > 0):
            raise ValueError(f"l_max must be finite and > 0, got {self.l_max}")
        if not (np.isfinite(self.lam) and self.lam >= 0):
            raise ValueError(f"lambda must be finite and >= 0, got {self.lam}")

    @property
    def spread(self) -> float:
        """(n-1)^(1/p) - 1, the per-dimension point-count factor."""
        return math.pow(self.n - 1, 1.0 / self.p) - 1.0


@dataclass(frozen=True)
class BandwidthResult:
    """A selected bandwidth plus method-specific diagnostics.

    ``regime``, ``clamped`` and ``j2a_at_sigma`` are populated by the Jacobian
    selector only; ``cv_curve`` (tuples of (sigma, mean validation MSE)) by
    the CV variants only.
    """

    sigma: float
    method: str
    regime: Regime | None = None
    clamped: bool = False
    j2a_at_sigma: float | None = None
    cv_curve: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"selected sigma must be finite and > 0, got {self.sigma}")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")


def jacobian_factors(sigma: float, params: JacobianParams) -> tuple[float, float]:
    """(j_a, j_b) at ``sigma``: kernel-decay and conditioning factors."""
    if not (np.isfinite(sigma) and sigma > 0):
        raise ValueError(f"sigma must be finite and > 0, got {sigma}")
    j_a = 1.0 / sigma
    t = params.spread * math.pi * sigma / (2.0 * params.l_max)
    denom = params.n * math.exp(-t * t) + params.lam
    with np.errstate(divide="ignore"):
        j_b = float(np.divide(1.0, denom))
    return j_a, j_b


def approx_jacobian_norm(sigma: float, params: JacobianParams) -> float:
    """The Jacobian proxy j_a(sigma) * j_b(sigma) (constant factor omitted)."""
    j_a, j_b = jacobian_factors(sigma, params)
    return j_a * j_b


def jacobian_sigma(params: JacobianParams, branch: int = PRINCIPAL) -> float:
    """Closed-form stationary bandwidth sigma_0 (branch 0) or sigma_-1 (branch -1).

    The Lambert W argument is computed as -(1/e) * (lambda / threshold) so
    that lambda equal to the threshold lands exactly on the branch point and
    the sqrt(3) clamping ratio is exact in floating point.
    """
    thr = lambda_threshold(params.n)
    if params.lam > thr:
        raise ValueError(
            f"lambda={params.lam} exceeds the threshold 2*n*e^(-3/2)={thr}; "
            "no stationary bandwidth exists"
        )
    arg = -math.exp(-1.0) * (params.lam / thr)
    if branch == NEGATIVE and arg == 0.0:
        raise ValueError("sigma_-1 is unbounded at lambda = 0")
    w = lambert_w(arg, branch)
    base = (math.sqrt(2.0) / math.pi) * params.l_max / params.spread
    return base * math.sqrt(1.0 - 2.0 * w)


def select_jacobian(X: np.ndarray, lam: float) -> BandwidthResult:
    """Jacobian-control selection on a feature matrix.

    Returns sigma_0(lambda); above the threshold 2 n e^(-3/2) it returns
    sigma_0 evaluated at the threshold with ``clamped`` set.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n, p = X.shape
    if n < 3:
        raise ValueError(f"Jacobian selection needs n >= 3, got {n}")
    l_max = max_pairwise_distance(X)
    if l_max <= 0.0:
        raise ValueError("all rows identical: l_max = 0")
    thr = lambda_threshold(n)
    clamped = lam > thr
    lam_eff = thr if clamped else lam
    sigma = jacobian_sigma(JacobianParams(n=n, p=p, l_max=l_max, lam=lam_eff))
    j2a = approx_jacobian_norm(sigma, JacobianParams(n=n, p=p, l_max=l_max, lam=lam))
    return BandwidthResult(
        sigma=sigma,
        method=METHOD_JACOBIAN,
        regime=classify_regime(n, lam),
        clamped=clamped,
        j2a_at_sigma=j2a,
    )


def select_silverman(X: np.ndarray) -> BandwidthResult:
    """Silverman's rule: (4 / (n (p+2)))^(1/(p+4)) * sigma_hat.

    sigma_hat is the square root of the mean per-coordinate sample variance
    (n-1 denominator), one scalar regardless of p. Blind to lambda and y.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n, p = X.shape
    if n < 2:
        raise ValueError(f"Silverman's rule needs n >= 2, got {n}")
    sigma_hat = math.sqrt(float(np.mean(np.var(X, axis=0, ddof=1))))
    if sigma_hat <= 0.0:
        raise ValueError("zero-variance features: Silverman's rule is undefined")
    factor = (4.0 / (n * (p + 2))) ** (1.0 / (p + 4))
    return BandwidthResult(sigma=factor * sigma_hat, method=METHOD_SILVERMAN)


def default_cv_grid(l_max: float, size: int = DEFAULT_GRID_SIZE, lo: float = DEFAULT_GRID_MIN) -> np.ndarray:
    """``size`` log-spaced bandwidths between ``lo`` and l_max (sorted)."""
    if size < 1:
        raise ValueError(f"grid size must be >= 1, got {size}")
    if lo <= 0 or l_max <= 0:
        raise ValueError("grid bounds must be positive")
    if size == 1:
        return np.array([math.sqrt(lo * l_max)])
    return np.sort(np.geomspace(lo, l_max, size))


def _cv_mean_losses(data: Dataset, lam: float, folds: int, grid: np.ndarray, seed: int) -> np.ndarray:
    """Mean validation MSE per grid sigma over a fixed fold partition.

    Folds are built once and reused for every sigma, so the grid comparison
    is paired. A fold whose training system fails to factor contributes +inf
    for that sigma.
    """
    plans = make_kfold(data.n, folds, seed)
    X, y = data.features, data.response
    mean_losses = np.empty(len(grid))
    for gi, sigma in enumerate(grid):
        total = 0.0
        for plan in plans:
            tr, te = plan.train_indices, plan.test_indices
            X_tr = X[tr]
            K = kernel_matrix(X_tr, None, sigma)
            try:
                alpha = solve(factor_spd(K, lam), y[tr])
            except FactorizationError:
                total = math.inf
                break
            pred = kernel_matrix(X[te], X_tr, sigma) @ alpha
            total += float(np.mean((y[te] - pred) ** 2))
        mean_losses[gi] = total / folds
    return mean_losses


def _run_cv(data: Dataset, lam: float, folds: int, grid: np.ndarray, seed: int, method: str) -> BandwidthResult:
    if folds < 2:
        raise ValueError(f"need at least 2 folds, got {folds}")
    if data.n < folds:
        raise ValueError(f"n={data.n} smaller than fold count {folds}")
    grid = np.sort(np.asarray(grid, dtype=float).reshape(-1))
    if grid.size == 0:
        raise ValueError("empty bandwidth grid")
    if np.any(grid <= 0) or not np.all(np.isfinite(grid)):
        raise ValueError("grid bandwidths must be finite and positive")
    losses = _cv_mean_losses(data, lam, folds, grid, seed)
    # ties broken toward the smallest sigma: argmin takes the first minimum
    # of the ascending grid
    best = int(np.argmin(losses))
    curve = tuple((float(s), float(l)) for s, l in zip(grid, losses))
    return BandwidthResult(sigma=float(grid[best]), method=method, cv_curve=curve)


def select_cv(
    data: Dataset,
    lam: float,
    folds: int = DEFAULT_FOLDS,
    grid: np.ndarray | None = None,
    grid_size: int = DEFAULT_GRID_SIZE,
    grid_min: float = DEFAULT_GRID_MIN,
    seed: int = 0,
) -> BandwidthResult:
    """Grid cross-validation: minimize mean validation MSE over k folds.

    Default grid: ``grid_size`` log-spaced bandwidths between ``grid_min``
    and the data diameter. Deterministic given (data, seed).
    """
    if grid is None:
        l_max = max_pairwise_distance(data.features)
        if l_max <= 0.0:
            raise ValueError("all rows identical: cannot build the default CV grid")
        lo, hi = min(grid_min, l_max), max(grid_min, l_max)
        grid = default_cv_grid(hi, grid_size, lo)
    return _run_cv(data, lam, folds, np.asarray(grid), seed, METHOD_CV)


def select_seeded_cv(
    data: Dataset,
    lam: float,
    folds: int = DEFAULT_FOLDS,
    grid_size: int = DEFAULT_GRID_SIZE,
    seed: int = 0,
) -> BandwidthResult:
    """Cross-validation on a log grid spanning [sigma_0/5, 5*sigma_0].

    sigma_0 comes from Jacobian selection on the full training matrix. The
    degenerate grid_size=1 uses {sigma_0}, the geometric midpoint.
    """
    sigma0 = select_jacobian(data.features, lam).sigma
    if grid_size < 1:
        raise ValueError(f"grid size must be >= 1, got {grid_size}")
    if grid_size == 1:
        grid = np.array([sigma0])
    else:
        grid = np.geomspace(sigma0 / 5.0, 5.0 * sigma0, grid_size)
    return _run_cv(data, lam, folds, grid, seed, METHOD_SEEDED_CV)


def select_bandwidth(
    method: str,
    data: Dataset,
    lam: float,
    folds: int = DEFAULT_FOLDS,
    grid: np.ndarray | None = None,
    grid_size: int = DEFAULT_GRID_SIZE,
    grid_min: float = DEFAULT_GRID_MIN,
    seed: int = 0,
) -> BandwidthResult:
    """Dispatch to one of the four selectors by method name."""
    if method == METHOD_JACOBIAN:
        return select_jacobian(data.features, lam)
    if method == METHOD_SILVERMAN:
        return select_silverman(data.features)
    if method == METHOD_CV:
        return select_cv(data, lam, folds=folds, grid=grid, grid_size=grid_size,
                         grid_min=grid_min, seed=seed)
    if method == METHOD_SEEDED_CV:
        return select_seeded_cv(data, lam, folds=folds, grid_size=grid_size, seed=seed)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
