"""Gaussian kernel ridge regression: fit, predict, serialization.

The fitted function is f(x) = sum_i alpha_i k(x, x_i) with dual coefficients
alpha = (K + lambda*I)^(-1) y. Models keep their own copy of the training
features, are immutable after fit, and predict is pure, so instances can be
shared across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .kernel import kernel_matrix
from .linalg import FactorizationError, factor_spd, solve


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class KrrModel:
    train_features: np.ndarray  # n x p, retained copy
    alpha: np.ndarray  # length n dual coefficients
    sigma: float
    lam: float

    def __post_init__(self):
        # retain private copies so the model never aliases caller-owned memory
        X = np.array(self.train_features, dtype=float, copy=True)
        a = np.array(self.alpha, dtype=float, copy=True)
        if a.shape[0] != X.shape[0]:
            raise ValueError(f"alpha has length {a.shape[0]}, expected {X.shape[0]}")
        X.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "train_features", X)
        object.__setattr__(self, "alpha", a)

    @property
    def n(self) -> int:
        return self.train_features.shape[0]

    @property
    def p(self) -> int:
        return self.train_features.shape[1]


def fit(data: Dataset, sigma: float, lam: float) -> KrrModel:
    """Solve (K + lambda*I) alpha = y on the training data.

    With lambda = 0 and duplicate training rows the kernel matrix is singular
    and the factorization fails; callers wanting interpolation must
    deduplicate or regularize.
    """
    K = kernel_matrix(data.features, None, sigma)
    try:
        alpha = solve(factor_spd(K, lam), data.response)
    except FactorizationError as exc:
        raise FactorizationError(
            f"{exc} (n={data.n}, sigma={sigma}: sigma may be too large relative to lambda)",
            pivot=exc.pivot,
        ) from exc
    return KrrModel(train_features=data.features, alpha=alpha, sigma=sigma, lam=lam)


def predict(model: KrrModel, X_new: np.ndarray) -> np.ndarray:
    """K(X_new, X_train) @ alpha; an empty input yields an empty vector."""
    X_new = np.asarray(X_new, dtype=float)
    if X_new.ndim == 1:
        X_new = X_new.reshape(-1, model.p) if model.p > 1 else X_new.reshape(-1, 1)
    if X_new.shape[1] != model.p:
        raise ValueError(f"X_new has {X_new.shape[1]} columns, model expects {model.p}")
    if X_new.shape[0] == 0:
        return np.empty(0)
    return kernel_matrix(X_new, model.train_features, model.sigma) @ model.alpha


def gradient_fd(model: KrrModel, x_star: np.ndarray, step: float | None = None) -> np.ndarray:
    """Central-difference gradient of the fitted function at ``x_star``.

    Per-coordinate error is O(step^2); the default step balances truncation
    against rounding at double precision. Used for bound verification only.
    """
    x_star = np.asarray(x_star, dtype=float).reshape(-1)
    if x_star.shape[0] != model.p:
        raise ValueError(f"x_star has {x_star.shape[0]} coordinates, model expects {model.p}")
    if step is None:
        step = 1e-5 * max(1.0, float(np.abs(x_star).max()))
    if step <= 0:
        raise ValueError(f"step must be > 0, got {step}")
    grad = np.empty(model.p)
    for j in range(model.p):
        hi = x_star.copy()
        lo = x_star.copy()
        hi[j] += step
        lo[j] -= step
        f_hi = predict(model, hi.reshape(1, -1))[0]
        f_lo = predict(model, lo.reshape(1, -1))[0]
        grad[j] = (f_hi - f_lo) / (2.0 * step)
    return grad


def save_model(model: KrrModel, path) -> None:
    """Serialize a model as tagged CSV sections at 17 significant digits.

    Sections: ``#meta`` (n, p, sigma, lambda), ``#train_features`` (one row
    per training point, row-major), ``#alpha`` (one coefficient per line).
    The round trip is value-exact.
    """
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("#meta\n")
        fh.write(f"{model.n},{model.p},{_fmt(model.sigma)},{_fmt(model.lam)}\n")
        fh.write("#train_features\n")
        for row in model.train_features:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
        fh.write("#alpha\n")
        for v in model.alpha:
            fh.write(_fmt(v) + "\n")


def load_model(path) -> KrrModel:
    """Read back a model written by ``save_model``."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0] != "#meta":
        raise ValueError(f"{path}: expected '#meta' tag on line 1")
    try:
        n_s, p_s, sigma_s, lam_s = lines[1].split(",")
        n, p = int(n_s), int(p_s)
        sigma, lam = float(sigma_s), float(lam_s)
    except (IndexError, ValueError) as exc:
        raise ValueError(f"{path}: malformed #meta section: {exc}") from None
    if len(lines) < 2 + 1 + n + 1 + n or lines[2] != "#train_features":
        raise ValueError(f"{path}: expected '#train_features' tag on line 3")
    feat_lines = lines[3 : 3 + n]
    if lines[3 + n] != "#alpha":
        raise ValueError(f"{path}: expected '#alpha' tag after the feature rows")
    alpha_lines = lines[4 + n : 4 + 2 * n]
    X = np.array([[float(v) for v in ln.split(",")] for ln in feat_lines])
    if X.shape != (n, p):
        raise ValueError(f"{path}: feature block has shape {X.shape}, expected {(n, p)}")
    alpha = np.array([float(ln) for ln in alpha_lines])
    if alpha.shape != (n,):
        raise ValueError(f"{path}: alpha block has length {alpha.shape[0]}, expected {n}")
    return KrrModel(train_features=X, alpha=alpha, sigma=sigma, lam=lam)
