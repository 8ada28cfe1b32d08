"""Dense symmetric linear algebra used by every certificate.

Matrices are plain ``numpy`` arrays. Functions that expect a symmetric
argument validate it (relative band 1e-12) and work on the symmetrized copy
``(S + S.T) / 2``; anything worse is rejected.
"""
from __future__ import annotations

import numpy as np

SYMMETRY_RTOL = 1e-12
PD_RTOL = 1e-10


class NotSymmetricError(ValueError):
    def __init__(self, i: int, j: int, gap: float):
        self.index = (i, j)
        self.gap = gap
        super().__init__(f"matrix is not symmetric: |S[{i},{j}] - S[{j},{i}]| = {gap:.3e}")


class NotPositiveDefiniteError(ValueError):
    def __init__(self, lambda_min: float):
        self.lambda_min = lambda_min
        super().__init__(f"matrix is not positive definite: lambda_min = {lambda_min:.6g}")


def max_abs(A) -> float:
    A = np.asarray(A, dtype=float)
    return float(np.max(np.abs(A))) if A.size else 0.0


def as_square(A, name: str = "matrix") -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ValueError(f"{name} must be a non-empty square matrix, got shape {A.shape}")
    return A


def as_symmetric(S, name: str = "matrix") -> np.ndarray:
    """Validate symmetry and return the symmetrized copy."""
    S = as_square(S, name)
    gap = np.abs(S - S.T)
    worst = float(gap.max())
    if worst > SYMMETRY_RTOL * max(1.0, max_abs(S)):
        i, j = np.unravel_index(int(np.argmax(gap)), gap.shape)
        raise NotSymmetricError(int(i), int(j), worst)
    return 0.5 * (S + S.T)


def sym_eig(S) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors (columns) of S."""
    w, V = np.linalg.eigh(as_symmetric(S))
    return w, V


def symmetric_part(A) -> np.ndarray:
    A = as_square(A)
    return 0.5 * (A + A.T)


def default_pd_tol(S) -> float:
    return PD_RTOL * max_abs(S)


def is_positive_definite(S, tol: float | None = None) -> tuple[bool, float]:
    """Return ``(lambda_min > tol, lambda_min)``.

    The default threshold is ``1e-10 * max|S_ij|`` so that a numerically
    singular matrix is never called definite.
    """
    S = as_symmetric(S)
    if tol is None:
        tol = default_pd_tol(S)
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    lam_min = float(np.linalg.eigvalsh(S)[0])
    return lam_min > tol, lam_min


def _pd_eig(Q) -> tuple[np.ndarray, np.ndarray]:
    Q = as_symmetric(Q)
    w, V = np.linalg.eigh(Q)
    if not w[0] > default_pd_tol(Q):
        raise NotPositiveDefiniteError(float(w[0]))
    return w, V


def sqrt_pd(Q) -> np.ndarray:
    """Symmetric positive definite square root P with P @ P = Q."""
    w, V = _pd_eig(Q)
    P = (V * np.sqrt(w)) @ V.T
    return 0.5 * (P + P.T)


def sqrt_pd_pair(Q) -> tuple[np.ndarray, np.ndarray]:
    """``(Q^{1/2}, Q^{-1/2})`` from a single eigendecomposition."""
    w, V = _pd_eig(Q)
    root = np.sqrt(w)
    P = (V * root) @ V.T
    P_inv = (V / root) @ V.T
    return 0.5 * (P + P.T), 0.5 * (P_inv + P_inv.T)


def kron(A, B) -> np.ndarray:
    """Kronecker product: block (i, j) of the result is ``A[i, j] * B``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    m, n = A.shape
    p, q = B.shape
    blocks = A[:, None, :, None] * B[None, :, None, :]
    return blocks.reshape(m * p, n * q)
