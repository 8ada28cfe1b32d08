"""Logarithmic norms (matrix measures) and the weighted vector norms they are induced by.

All measure functions accept a single square matrix or a stack of shape
``(..., n, n)``; a stack yields an array of values, a single matrix a float.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .matrix_core import as_symmetric, max_abs, sqrt_pd_pair

_ORDERS = {1: 1, 2: 2, np.inf: np.inf, "inf": np.inf, float("inf"): np.inf}


def _order(p):
    try:
        return _ORDERS[p]
    except (KeyError, TypeError):
        raise ValueError(f"unsupported norm order {p!r}; use 1, 2 or inf") from None


@dataclass(frozen=True)
class Weight:
    """Symmetric positive definite weight P with Q = P @ P and cached P^{-1}.

    Defines the norm ``||x||_{2,P} = ||P x||_2``.
    """

    P: np.ndarray
    Q: np.ndarray = field(repr=False)
    P_inv: np.ndarray = field(repr=False)

    @classmethod
    def from_Q(cls, Q) -> "Weight":
        Q = as_symmetric(Q, "Q")
        P, P_inv = sqrt_pd_pair(Q)
        return cls._frozen(P, Q, P_inv)

    @classmethod
    def from_P(cls, P) -> "Weight":
        P = as_symmetric(P, "P")
        Q = P @ P
        Q = 0.5 * (Q + Q.T)
        # the eigenvectors of Q are those of P, so this checks P > 0 too
        root, P_inv = sqrt_pd_pair(Q)
        if max_abs(root - P) > 1e-8 * max(1.0, max_abs(P)):
            raise ValueError("P must be positive definite")
        return cls._frozen(P, Q, P_inv)

    @classmethod
    def identity(cls, n: int) -> "Weight":
        I = np.eye(n)
        return cls._frozen(I, I.copy(), I.copy())

    @classmethod
    def _frozen(cls, P, Q, P_inv) -> "Weight":
        arrays = [np.array(a, dtype=float) for a in (P, Q, P_inv)]
        for a in arrays:
            a.setflags(write=False)
        return cls(*arrays)

    @property
    def n(self) -> int:
        return self.P.shape[0]


@dataclass(frozen=True)
class DiagWeight:
    """Positive diagonal weight Q, norm ``||x||_{p,Q} = ||Q x||_p``."""

    diag: np.ndarray

    def __post_init__(self):
        d = np.array(self.diag, dtype=float).ravel()
        if d.size == 0 or not np.all(d > 0) or not np.all(np.isfinite(d)):
            raise ValueError(f"diagonal weight entries must be finite and > 0, got {d}")
        d.setflags(write=False)
        object.__setattr__(self, "diag", d)

    @classmethod
    def ones(cls, n: int) -> "DiagWeight":
        return cls(np.ones(n))

    @property
    def n(self) -> int:
        return self.diag.size

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.diag)


def _stack(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise ValueError(f"expected square matrix (or stack), got shape {A.shape}")
    return A


def _out(values: np.ndarray):
    return float(values) if values.ndim == 0 else values


def mu2(A):
    """Largest eigenvalue of the symmetric part (A + A^T)/2."""
    A = _stack(A)
    S = 0.5 * (A + np.swapaxes(A, -1, -2))
    return _out(np.linalg.eigvalsh(S)[..., -1])


def mu2_weighted(A, w: Weight):
    A = _stack(A)
    if A.shape[-1] != w.n:
        raise ValueError(f"shape mismatch: A is {A.shape[-2:]}, weight is {w.n}x{w.n}")
    return mu2(w.P @ A @ w.P_inv)


def _diag_weight(A, q: DiagWeight | None) -> np.ndarray:
    if q is None:
        return np.ones(A.shape[-1])
    if q.n != A.shape[-1]:
        raise ValueError(f"shape mismatch: A is {A.shape[-2:]}, weight has length {q.n}")
    return q.diag


def mu1_weighted(A, q: DiagWeight | None = None):
    """Column-sum measure of Q A Q^{-1}: max_j (a_jj + sum_{i!=j} (q_i/q_j)|a_ij|)."""
    A = _stack(A)
    d = _diag_weight(A, q)
    B = np.abs(A) * (d[:, None] / d[None, :])
    diag = np.diagonal(A, axis1=-2, axis2=-1)
    off = B.sum(axis=-2) - np.diagonal(B, axis1=-2, axis2=-1)
    return _out(np.max(diag + off, axis=-1))


def muinf_weighted(A, q: DiagWeight | None = None):
    """Row-sum measure of Q A Q^{-1}: max_i (a_ii + sum_{j!=i} (q_i/q_j)|a_ij|)."""
    A = _stack(A)
    d = _diag_weight(A, q)
    B = np.abs(A) * (d[:, None] / d[None, :])
    diag = np.diagonal(A, axis1=-2, axis2=-1)
    off = B.sum(axis=-1) - np.diagonal(B, axis1=-2, axis2=-1)
    return _out(np.max(diag + off, axis=-1))


def lognorm(A, p=2, weight: Weight | DiagWeight | None = None):
    """Dispatch to the measure induced by ``||.||_p`` under ``weight``."""
    p = _order(p)
    if p == 2:
        if weight is None:
            return mu2(A)
        if isinstance(weight, DiagWeight):
            weight = Weight.from_P(weight.matrix)
        return mu2_weighted(A, weight)
    if isinstance(weight, Weight):
        raise TypeError("p in {1, inf} requires a diagonal weight")
    return mu1_weighted(A, weight) if p == 1 else muinf_weighted(A, weight)


def induced_norm(B, p=2) -> float:
    """Operator norm of B induced by the vector p-norm, p in {1, 2, inf}."""
    B = np.asarray(B, dtype=float)
    p = _order(p)
    if p == 1:
        return float(np.abs(B).sum(axis=0).max())
    if p == np.inf:
        return float(np.abs(B).sum(axis=1).max())
    top = np.linalg.eigvalsh(B.T @ B)[-1]
    return float(np.sqrt(max(top, 0.0)))


def limit_quotient(A, h: float, p=2, weight: Weight | DiagWeight | None = None) -> float:
    """(||I + hA|| - 1)/h in the weighted induced norm; tends to mu(A) as h -> 0+."""
    A = np.asarray(A, dtype=float)
    if weight is None:
        M = np.eye(A.shape[0]) + h * A
    elif isinstance(weight, Weight):
        M = weight.P @ (np.eye(A.shape[0]) + h * A) @ weight.P_inv
    else:
        d = weight.diag
        M = (d[:, None] / d[None, :]) * (np.eye(A.shape[0]) + h * A)
    return (induced_norm(M, p) - 1.0) / h


def _norm_matrix(w, use_Q: bool):
    if w is None:
        return None
    if isinstance(w, DiagWeight):
        return w.diag
    return w.Q if use_Q else w.P


def weighted_vec_norm(x, p=2, w: Weight | DiagWeight | None = None, use_Q: bool = False) -> float:
    """``||M x||_p`` with M the weight's norm matrix.

    For a :class:`Weight` the norm matrix is P, i.e. ``||x||_{2,P}``; pass
    ``use_Q=True`` to get ``||Q x||_p`` instead. A :class:`DiagWeight` always
    uses its diagonal.
    """
    x = np.asarray(x, dtype=float).ravel()
    p = _order(p)
    M = _norm_matrix(w, use_Q)
    if M is not None:
        if M.shape[0] != x.size:
            raise ValueError(f"length mismatch: x has {x.size} entries, weight is {M.shape[0]}")
        x = M * x if M.ndim == 1 else M @ x
    return float(np.linalg.norm(x, ord=p))


def block_norms(u, n: int, p=2, w: Weight | DiagWeight | None = None, use_Q: bool = False) -> np.ndarray:
    """Per-node weighted norms of a stacked state; leading batch axes allowed.

    ``u`` is flat of length ``N*n`` or blocked with shape ``(..., N, n)``.
    """
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        if u.size % n:
            raise ValueError(f"state length {u.size} is not a multiple of n = {n}")
        blocks = u.reshape(-1, n)
    elif u.shape[-1] == n:
        blocks = u
    else:
        raise ValueError(f"blocked state must have trailing axis n = {n}, got shape {u.shape}")
    p = _order(p)
    M = _norm_matrix(w, use_Q)
    if M is not None:
        if M.shape[0] != n:
            raise ValueError(f"weight dimension {M.shape[0]} does not match n = {n}")
        blocks = blocks * M if M.ndim == 1 else blocks @ M.T
    return np.linalg.norm(blocks, ord=p, axis=-1)


def network_norm(u, n: int, p=2, w: Weight | DiagWeight | None = None,
                 use_Q: bool = False, scale: float = 1.0):
    """Outer p-norm of the per-node weighted norms, times ``scale``.

    With ``scale = h**(1/p)`` on a uniform grid this approximates the
    integral norm of a spatially distributed state.
    """
    inner = block_norms(u, n, p, w, use_Q)
    return _out(scale * np.linalg.norm(inner, ord=_order(p), axis=-1))
