"""Eigenvalues of small dense symmetric matrices.

The certifier only ever needs eigenvalues of k x k matrices with k = 2 in
all shipped scenarios, so a closed form covers the hot path; larger
systems fall back to a cyclic Jacobi iteration.  Inputs are symmetrized
as (A + A^T)/2 before solving.
"""

from __future__ import annotations

import numpy as np

__all__ = ["symmetric_eigenvalues", "JacobiConvergenceError"]


class JacobiConvergenceError(RuntimeError):
    """Raised when the Jacobi sweep fails to reach the off-diagonal target."""


def _eigvals_2x2(a11: float, a12: float, a22: float) -> np.ndarray:
    tr = a11 + a22
    # Discriminant written as a sum of squares so it never goes negative.
    disc = float(np.hypot(a11 - a22, 2.0 * a12))
    return np.array([0.5 * (tr - disc), 0.5 * (tr + disc)])


def jacobi_eigenvalues(matrix: np.ndarray, tol: float = 1e-12, max_sweeps: int = 64) -> np.ndarray:
    """Cyclic Jacobi iteration; returns eigenvalues in ascending order.

    Iterates sweeps of plane rotations until the off-diagonal Frobenius
    norm drops below ``tol`` (relative to the matrix scale).
    """
    a = np.array(matrix, dtype=float)
    a = 0.5 * (a + a.T)
    n = a.shape[0]
    scale = max(float(np.max(np.abs(a))), 1e-300)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2) * 2.0)
        if off <= tol * scale:
            return np.sort(np.diag(a))
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = 0.5 * (a[q, q] - a[p, p]) / apq
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) \
                    if theta != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                a = 0.5 * (a + a.T)
    off = np.sqrt(np.sum(np.tril(a, -1) ** 2) * 2.0)
    if off <= tol * scale:
        return np.sort(np.diag(a))
    raise JacobiConvergenceError(
        f"Jacobi iteration did not converge in {max_sweeps} sweeps "
        f"(off-diagonal norm {off:.3e})")


def symmetric_eigenvalues(matrix: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of the symmetric part of ``matrix``.

    k = 1 and k = 2 use closed forms; larger sizes use the Jacobi sweep.
    """
    a = np.atleast_2d(np.asarray(matrix, dtype=float))
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    if n == 1:
        return a[0, :1].copy()
    if n == 2:
        s = 0.5 * (a + a.T)
        return _eigvals_2x2(s[0, 0], s[0, 1], s[1, 1])
    return jacobi_eigenvalues(a)
