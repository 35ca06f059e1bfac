"""Dense SPD solves for the ridge system and eigenvalue extremes.

Sized for dense problems (n up to a few thousand for solves, n <= 500 for
eigenvalue extraction, which exists for bound verification rather than
production paths). Factorizations are immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack

_EIG_MAX_N = 500


class FactorizationError(RuntimeError):
    """Cholesky failure: K + lambda*I is not numerically positive definite.

    ``pivot`` is the 1-based index of the first non-positive pivot. Typically
    means lambda is too small for this sigma; the caller may retry — the
    toolkit never inflates lambda silently.
    """

    def __init__(self, message: str, pivot: int):
        super().__init__(message)
        self.pivot = pivot


def _check_square_symmetric(M: np.ndarray, what: str) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{what} must be square, got shape {M.shape}")
    scale = 1.0 + float(np.abs(M).max(initial=0.0))
    if float(np.abs(M - M.T).max(initial=0.0)) > 1e-10 * scale:
        raise ValueError(f"{what} is not symmetric within tolerance")
    return M


@dataclass(frozen=True)
class SpdSolve:
    """Lower-triangular Cholesky factor of K + shift*I."""

    factor: np.ndarray
    shift: float

    @property
    def n(self) -> int:
        return self.factor.shape[0]


def factor_spd(K: np.ndarray, lam: float = 0.0) -> SpdSolve:
    """Cholesky-factor K + lam*I.

    Raises FactorizationError with the failing pivot index when the shifted
    matrix is not positive definite (a sign that lam is too small for the
    kernel bandwidth in use).
    """
    K = _check_square_symmetric(K, "K")
    lam = float(lam)
    if lam < 0.0 or not np.isfinite(lam):
        raise ValueError(f"lambda must be finite and >= 0, got {lam}")
    A = K + lam * np.eye(K.shape[0])
    c, info = lapack.dpotrf(A, lower=1, clean=1, overwrite_a=1)
    if info > 0:
        raise FactorizationError(
            f"Cholesky failed at pivot {info}: K + {lam}*I is not positive "
            "definite (lambda too small for this sigma?)",
            pivot=int(info),
        )
    if info < 0:
        raise ValueError(f"invalid argument {-info} passed to dpotrf")
    c.setflags(write=False)
    return SpdSolve(factor=c, shift=lam)


def solve(s: SpdSolve, b: np.ndarray) -> np.ndarray:
    """Solve (K + shift*I) x = b using the stored factor."""
    b = np.asarray(b, dtype=float)
    if b.shape[0] != s.n:
        raise ValueError(f"b has length {b.shape[0]}, expected {s.n}")
    x, info = lapack.dpotrs(s.factor, b, lower=1)
    if info != 0:
        raise ValueError(f"invalid argument {-info} passed to dpotrs")
    return x


def singular_extremes(M: np.ndarray) -> tuple[float, float]:
    """(largest, smallest) singular value of a symmetric PSD matrix.

    Uses a dense symmetric eigendecomposition; for PSD input the singular
    values are the eigenvalues (tiny negative rounding noise is folded in by
    absolute value). Restricted to n <= 500: this exists for verification,
    not production paths.
    """
    M = _check_square_symmetric(M, "M")
    n = M.shape[0]
    if n > _EIG_MAX_N:
        raise ValueError(f"singular_extremes limited to n <= {_EIG_MAX_N}, got {n}")
    try:
        eigs = np.linalg.eigvalsh(M)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"eigensolve did not converge: {exc}") from exc
    s_max = float(np.abs(eigs).max())
    if eigs.min() < -1e-10 * max(1.0, s_max):
        raise ValueError("M is not PSD within tolerance")
    svals = np.abs(eigs)
    return float(svals.max()), float(svals.min())
