"""Shared independent oracles for cross-checking the library paths."""

import numpy as np


def jacobi_eigenvalues(M, sweeps=100, tol=1e-14):
    """Cyclic Jacobi rotations on a symmetric matrix; returns sorted eigenvalues."""
    A = np.array(M, dtype=float)
    n = A.shape[0]
    for _ in range(sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off = max(off, abs(A[p, q]))
                if abs(A[p, q]) <= tol * max(1.0, abs(A[p, p]) + abs(A[q, q])):
                    continue
                theta = 0.5 * np.arctan2(2 * A[p, q], A[q, q] - A[p, p])
                c, s = np.cos(theta), np.sin(theta)
                J = np.eye(n)
                J[p, p] = J[q, q] = c
                J[p, q] = s
                J[q, p] = -s
                A = J.T @ A @ J
        if off <= tol:
            break
    return np.sort(np.diag(A))
