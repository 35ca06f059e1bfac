"""Numerical verification of the toolkit's bound claims on concrete instances.

Each check evaluates one claimed inequality (or family of shape conditions)
and aggregates the outcome into a BoundReport: a trial count, a violation
count, and the worst signed margin (negative iff something was violated).
Reports are reproducible bit-for-bit from their config string.

The inverse-kernel-norm check compares on the spectral scale,

    margin = n * exp(-t^2) - s_min(K),

rather than on the inverse scale 1/(s_min + lambda) - j_b. The two agree in
sign (they certify the same inequality), but near-singular kernel matrices
push the inverse scale far beyond what double precision can certify, while
the spectral scale degrades gracefully to eigensolver noise (~1e-13).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bandwidth import JacobianParams, Regime, approx_jacobian_norm, classify_regime, jacobian_sigma
from .data import Dataset
from .kernel import gradient_one_norm_bound, kernel_gradient_norm, kernel_matrix, max_pairwise_distance
from .krr import fit, gradient_fd
from .lambertw import NEGATIVE
from .linalg import singular_extremes

CLAIM_PROP1 = "prop1-regimes"
CLAIM_PROP2 = "prop2-chain"
CLAIM_PROP3 = "prop3-gradmax"
CLAIM_PROP4 = "prop4-inverse-norm"
CLAIM_BERMANIS = "bermanis-count"
CLAIMS = (CLAIM_PROP1, CLAIM_PROP2, CLAIM_PROP3, CLAIM_PROP4, CLAIM_BERMANIS)


def _fmt(x) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class BoundReport:
    """Aggregated outcome of one verification run."""

    claim: str
    trials: int
    violations: int
    worst_margin: float
    seed: int
    config: str

    def __post_init__(self):
        if not 0 <= self.violations <= self.trials:
            raise ValueError("violations must lie in [0, trials]")
        if (self.violations > 0) != (self.worst_margin < 0):
            raise ValueError("worst_margin sign inconsistent with violation count")

    @property
    def passed(self) -> bool:
        return self.violations == 0


def _report(claim: str, margins: list[float], seed: int, config: str) -> BoundReport:
    margins = [float(m) for m in margins]
    violations = sum(1 for m in margins if m < 0)
    return BoundReport(
        claim=claim,
        trials=len(margins),
        violations=violations,
        worst_margin=min(margins),
        seed=seed,
        config=config,
    )


def reports_to_csv(reports) -> str:
    """One line per claim: claim, trials, violations, worst_margin, seed."""
    lines = ["claim,trials,violations,worst_margin,seed"]
    for r in reports:
        lines.append(f"{r.claim},{r.trials},{r.violations},{_fmt(r.worst_margin)},{r.seed}")
    return "\n".join(lines) + "\n"


def write_reports_csv(reports, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(reports_to_csv(reports))


def check_prop1_regimes(
    params: JacobianParams, grid_points: int = 1000, span: tuple[float, float] = (1e-3, 1e3)
) -> BoundReport:
    """Verify the proxy's shape for the regime selected by lambda.

    Scans a log grid of ``grid_points`` bandwidths over ``span * l_max`` and
    checks the regime-appropriate conditions: divergence at 0, the limit at
    infinity, a (local) minimum at sigma_0 and maximum at sigma_-1, or
    monotone descent. Margins are heterogeneous (grid cells for locations,
    proxy differences for orderings); negative means violated.
    """
    grid = np.geomspace(span[0] * params.l_max, span[1] * params.l_max, grid_points)
    with np.errstate(over="ignore"):
        J = np.array([approx_jacobian_norm(s, params) for s in grid])
    regime = classify_regime(params.n, params.lam)
    margins: list[float] = []

    if regime is Regime.NO_REGULARIZATION:
        sigma0 = jacobian_sigma(params)
        i_star = int(np.argmin(np.abs(np.log(grid) - math.log(sigma0))))
        i_min = int(np.argmin(J))
        margins.append(1.5 - abs(i_min - i_star))  # argmin within one grid cell
        left = J[: i_min + 1]
        if len(left) > 1:
            margins.append(float(np.min(left[:-1] - left[1:])))  # strict descent
        right = J[i_min:]
        if len(right) > 1:
            with np.errstate(invalid="ignore"):  # inf - inf on the overflow plateau
                diffs = right[1:] - right[:-1]
            finite = np.isfinite(diffs)
            if np.any(finite):
                margins.append(float(np.min(diffs[finite])))  # strict ascent while finite
            # an inf plateau at the far end is overflow saturation, not a
            # violation, but falling back from inf to finite would be one
            if np.any(np.isneginf(diffs)):
                margins.append(-math.inf)
        margins.append(float(J[0] - J[i_min]))  # diverges toward sigma -> 0
        margins.append(float(J[-1] - J[i_min]))  # diverges toward sigma -> inf
    elif regime is Regime.LOCAL_MINIMUM:
        sigma0 = jacobian_sigma(params)
        sigma1 = jacobian_sigma(params, NEGATIVE)
        j0 = approx_jacobian_norm(sigma0, params)
        j1 = approx_jacobian_norm(sigma1, params)
        margins.append(approx_jacobian_norm(0.95 * sigma0, params) - j0)
        margins.append(approx_jacobian_norm(1.05 * sigma0, params) - j0)
        margins.append(j1 - approx_jacobian_norm(0.95 * sigma1, params))
        margins.append(j1 - approx_jacobian_norm(1.05 * sigma1, params))
        margins.append(float(J[0]) - j0)  # diverges at 0
        margins.append(j1 - float(J[-1]))  # decays toward 0 at infinity
    else:
        margins.append(float(np.min(J[:-1] - J[1:])))  # strictly decreasing throughout

    config = (
        f"claim={CLAIM_PROP1};n={params.n};p={params.p};l_max={_fmt(params.l_max)};"
        f"lambda={_fmt(params.lam)};regime={regime.value};grid_points={grid_points};"
        f"span={_fmt(span[0])}:{_fmt(span[1])}"
    )
    return _report(CLAIM_PROP1, margins, seed=0, config=config)


def check_prop2_chain(
    data: Dataset,
    sigma: float,
    lam: float,
    trials: int = 100,
    seed: int = 0,
    rel_tol: float = 1e-8,
    step: float | None = None,
) -> BoundReport:
    """Check the three-factor gradient bound at random query points.

    For each x* drawn uniformly from the data bounding box inflated by 20%
    (probing the extrapolation region where derivatives peak):

        ||grad f(x*)||_2 <= sqrt(n) * ||y||_2 * max_i ||grad k_i(x*)||_1
                            * 1/(s_min(K) + lambda)

    with the gradient estimated by central differences. ``rel_tol`` absorbs
    finite-difference truncation: margins carry the slack, so a violation is
    exactly a negative margin.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    model = fit(data, sigma, lam)
    X, y = data.features, data.response
    n = data.n
    K = kernel_matrix(X, None, sigma)
    s_min = singular_extremes(K)[1]
    inv_norm = 1.0 / (s_min + lam)
    outer = math.sqrt(n) * float(np.linalg.norm(y)) * inv_norm

    lo = X.min(axis=0)
    hi = X.max(axis=0)
    mid = 0.5 * (lo + hi)
    half = 0.6 * (hi - lo)  # 1.2x the half-range
    rng = np.random.default_rng(seed)
    margins = []
    for _ in range(trials):
        x_star = rng.uniform(mid - half, mid + half)
        grad = gradient_fd(model, x_star, step)
        bound = outer * gradient_one_norm_bound(X, x_star, sigma)
        margins.append(bound * (1.0 + rel_tol) - float(np.linalg.norm(grad)))
    config = (
        f"claim={CLAIM_PROP2};seed={seed};n={n};p={data.p};sigma={_fmt(sigma)};"
        f"lambda={_fmt(lam)};trials={trials};rel_tol={_fmt(rel_tol)};"
        f"step={'auto' if step is None else _fmt(step)}"
    )
    return _report(CLAIM_PROP2, margins, seed=seed, config=config)


def check_prop3_gradmax(sigma: float, grid_points: int = 10_000) -> BoundReport:
    """Check the kernel-gradient cap 1/(sigma sqrt(e)) on a distance grid.

    Conditions over d in [0, 10 sigma]: no grid value exceeds the cap (to
    1e-12 relative), the grid maximum comes within 1e-6 relative of the cap,
    and the argmax lands within one grid cell of d = sigma.
    """
    if grid_points < 3:
        raise ValueError(f"grid_points must be >= 3, got {grid_points}")
    d = np.linspace(0.0, 10.0 * sigma, grid_points)
    g = kernel_gradient_norm(d, sigma)
    cap = 1.0 / (sigma * math.sqrt(math.e))
    gmax = float(np.max(g))
    i_max = int(np.argmax(g))
    cell = 10.0 * sigma / (grid_points - 1)
    margins = [
        cap * (1.0 + 1e-12) - gmax,  # the cap really is an upper bound
        1e-6 * cap - (cap - gmax),  # and the grid max comes within 1e-6 of it
        cell - abs(float(d[i_max]) - sigma),  # attained next to d = sigma
    ]
    config = f"claim={CLAIM_PROP3};sigma={_fmt(sigma)};grid_points={grid_points}"
    return _report(CLAIM_PROP3, margins, seed=0, config=config)


def check_prop4(X: np.ndarray, sigma: float, lam: float = 0.0) -> BoundReport:
    """Compare s_min(K) against the conditioning factor's denominator.

    The claim 1/(s_min + lambda) >= j_b(sigma) is equivalent to
    s_min <= n * exp(-t^2); the margin is that difference (lambda-independent,
    certifiable to eigensolver accuracy even when both sides underflow the
    inverse scale).
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n, p = X.shape
    if n < 3:
        raise ValueError(f"check_prop4 needs n >= 3, got {n}")
    l_max = max_pairwise_distance(X)
    params = JacobianParams(n=n, p=p, l_max=l_max, lam=lam)
    K = kernel_matrix(X, None, sigma)
    s_min = singular_extremes(K)[1]
    t = params.spread * math.pi * sigma / (2.0 * l_max)
    margin = n * math.exp(-t * t) - s_min
    config = (
        f"claim={CLAIM_PROP4};n={n};p={p};sigma={_fmt(sigma)};lambda={_fmt(lam)};"
        f"l_max={_fmt(l_max)};s_min={_fmt(s_min)}"
    )
    return _report(CLAIM_PROP4, [margin], seed=0, config=config)


def check_bermanis_count(X: np.ndarray, sigma: float, delta: float) -> BoundReport:
    """Count singular values >= delta * s_1 against the product bound.

        #{j : s_j / s_1 >= delta} <= ((2/pi) (l_max/sigma) sqrt(log(1/delta)) + 1)^p
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n, p = X.shape
    K = kernel_matrix(X, None, sigma)
    eigs = np.linalg.eigvalsh(K)
    svals = np.abs(eigs)
    s1 = float(svals.max())
    count = int(np.sum(svals >= delta * s1))
    l_max = max_pairwise_distance(X)
    bound = ((2.0 / math.pi) * (l_max / sigma) * math.sqrt(math.log(1.0 / delta)) + 1.0) ** p
    config = (
        f"claim={CLAIM_BERMANIS};n={n};p={p};sigma={_fmt(sigma)};delta={_fmt(delta)};"
        f"l_max={_fmt(l_max)};count={count};bound={_fmt(bound)}"
    )
    return _report(CLAIM_BERMANIS, [bound - count], seed=0, config=config)
