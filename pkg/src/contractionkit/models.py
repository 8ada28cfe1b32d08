"""Reaction systems with analytic Jacobians.

``F(x, t)`` and ``jac(x, t)`` are vectorized over leading axes: ``x`` has
shape ``(..., n)``; ``F`` returns ``(..., n)`` and ``jac`` ``(..., n, n)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np


@dataclass(frozen=True)
class Box:
    """Product of closed intervals; bounds may be infinite."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.array(self.lower, dtype=float).ravel()
        hi = np.array(self.upper, dtype=float).ravel()
        if lo.shape != hi.shape or lo.size == 0:
            raise ValueError("box bounds must be non-empty sequences of equal length")
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)) or np.any(lo > hi):
            raise ValueError(f"empty box: lower={lo}, upper={hi}")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def whole_space(cls, n: int) -> "Box":
        return cls(np.full(n, -np.inf), np.full(n, np.inf))

    @property
    def n(self) -> int:
        return self.lower.size

    def contains(self, x, atol: float = 0.0) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.all((x >= self.lower - atol) & (x <= self.upper + atol), axis=-1)

    def project(self, x) -> np.ndarray:
        return np.clip(x, self.lower, self.upper)

    def sample_interior(self, rng: np.random.Generator, count: int,
                        window: tuple[float, float] = (0.01, 100.0)) -> np.ndarray:
        """Random interior points.

        Coordinates with one infinite bound are sampled log-uniformly at
        distance ``window`` from the finite bound; fully unbounded ones
        uniformly in ``[-window[1], window[1]]``.
        """
        lo_off, hi_off = window
        out = np.empty((count, self.n))
        for i, (lo, hi) in enumerate(zip(self.lower, self.upper)):
            if np.isfinite(lo) and np.isfinite(hi):
                span = hi - lo
                out[:, i] = lo + span * rng.uniform(0.005, 0.995, count)
            elif np.isfinite(lo) or np.isfinite(hi):
                dist = np.exp(rng.uniform(np.log(lo_off), np.log(hi_off), count))
                out[:, i] = lo + dist if np.isfinite(lo) else hi - dist
            else:
                out[:, i] = rng.uniform(-hi_off, hi_off, count)
        return out


@dataclass(frozen=True)
class DiffusionSpec:
    d: np.ndarray

    def __post_init__(self):
        d = np.array(self.d, dtype=float).ravel()
        if d.size == 0 or not np.all(d > 0) or not np.all(np.isfinite(d)):
            raise ValueError(f"diffusion coefficients must be finite and > 0, got {d}")
        d.setflags(write=False)
        object.__setattr__(self, "d", d)

    @classmethod
    def uniform(cls, n: int, value: float = 1.0) -> "DiffusionSpec":
        return cls(np.full(n, float(value)))

    @property
    def n(self) -> int:
        return self.d.size

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.d)


@dataclass(frozen=True)
class Decomposition:
    """Scalar pieces of a two-species feedback system.

    The field is ``(-f1(x) + g1(y), f2(x) - g2(y))``; ``df1`` etc. are the
    derivatives.
    """

    f1: Callable
    g1: Callable
    f2: Callable
    g2: Callable
    df1: Callable
    dg1: Callable
    df2: Callable
    dg2: Callable


@dataclass(frozen=True)
class ReactionSystem:
    n: int
    box: Box
    F: Callable[[np.ndarray, float], np.ndarray]
    jac: Callable[[np.ndarray, float], np.ndarray]
    params: Mapping[str, object] = field(default_factory=dict)
    label: str = "system"
    decomposition: Decomposition | None = None
    autonomous: bool = True

    def __post_init__(self):
        if self.box.n != self.n:
            raise ValueError(f"box has dimension {self.box.n}, system has n = {self.n}")

    def __call__(self, x, t: float = 0.0) -> np.ndarray:
        return self.F(np.asarray(x, dtype=float), t)


def _positive(**kwargs):
    for name, value in kwargs.items():
        if not (np.isfinite(value) and value > 0):
            raise ValueError(f"{name} must be > 0, got {value}")


def _nonnegative(**kwargs):
    for name, value in kwargs.items():
        if not (np.isfinite(value) and value >= 0):
            raise ValueError(f"{name} must be >= 0, got {value}")


def example1(S_Y: float = 1.0, k1: float = 1.0, k2: float = 1.0,
             delta: float = 1.0, z: float = 1.0) -> ReactionSystem:
    """Two-species binding system with a constant inflow ``z``.

        x' = z - delta x + k1 y - k2 (S_Y - y) x
        y' = -k1 y + k2 (S_Y - y) x

    on V = [0, inf) x [0, S_Y]. The Jacobian is ``[[-delta - a, b], [a, -b]]``
    with ``a = k2 (S_Y - y)`` and ``b = k1 + k2 x``; ``z`` does not enter it.
    ``k2 = 0`` is accepted as the decoupled linear limit.
    """
    _positive(S_Y=S_Y, k1=k1, delta=delta)
    _nonnegative(k2=k2, z=z)

    def F(u, t=0.0):
        x, y = u[..., 0], u[..., 1]
        out = np.empty_like(u, dtype=float)
        net_binding = k2 * (S_Y - y) * x - k1 * y
        out[..., 0] = z - delta * x - net_binding
        out[..., 1] = net_binding
        return out

    def jac(u, t=0.0):
        x, y = u[..., 0], u[..., 1]
        a = k2 * (S_Y - y)
        b = k1 + k2 * x
        row0 = np.stack([-delta - a, b], axis=-1)
        row1 = np.stack([a, -b], axis=-1)
        return np.stack([row0, row1], axis=-2)

    return ReactionSystem(
        n=2,
        box=Box([0.0, 0.0], [np.inf, S_Y]),
        F=F,
        jac=jac,
        params=dict(S_Y=S_Y, k1=k1, k2=k2, delta=delta, z=z),
        label="example1",
    )


def example2(delta: float = 0.5, epsilon: float = 0.1, d: float = 1.0) -> ReactionSystem:
    """Mutual positive feedback with superlinear degradation.

        x' = -x + y^(2+eps)
        y' = delta x - (y^3 + y^(2+eps) + d y)

    on V = [0, inf)^2, with decomposition ``f1 = x``, ``g1 = y^(2+eps)``,
    ``f2 = delta x``, ``g2 = y^3 + y^(2+eps) + d y``.
    """
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if not 0 < epsilon <= 0.5:
        raise ValueError(f"epsilon must lie in (0, 0.5], got {epsilon}")
    _positive(d=d)
    e = 2.0 + epsilon

    # powers are taken of max(y, 0): the field is only defined on V, and the
    # clipped extension keeps Runge-Kutta stages finite right at y = 0
    def g1(y):
        return np.maximum(y, 0.0) ** e

    def dg1(y):
        return e * np.maximum(y, 0.0) ** (e - 1.0)

    def g2(y):
        return y**3 + g1(y) + d * y

    def dg2(y):
        return 3.0 * y**2 + dg1(y) + d

    def F(u, t=0.0):
        x, y = u[..., 0], u[..., 1]
        out = np.empty_like(u, dtype=float)
        gy = g1(y)
        out[..., 0] = gy - x
        out[..., 1] = delta * x - (y**3 + gy + d * y)
        return out

    def jac(u, t=0.0):
        x, y = u[..., 0], u[..., 1]
        one = np.ones_like(x)
        row0 = np.stack([-one, dg1(y)], axis=-1)
        row1 = np.stack([delta * one, -dg2(y)], axis=-1)
        return np.stack([row0, row1], axis=-2)

    decomposition = Decomposition(
        f1=lambda x: np.asarray(x, dtype=float),
        g1=g1,
        f2=lambda x: delta * np.asarray(x, dtype=float),
        g2=g2,
        df1=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        dg1=dg1,
        df2=lambda x: np.full_like(np.asarray(x, dtype=float), delta),
        dg2=dg2,
    )
    return ReactionSystem(
        n=2,
        box=Box([0.0, 0.0], [np.inf, np.inf]),
        F=F,
        jac=jac,
        params=dict(delta=delta, epsilon=epsilon, d=d),
        label="example2",
        decomposition=decomposition,
    )


def linear_system(A, c=None) -> ReactionSystem:
    """Affine field ``F(x) = A x + c`` on the whole space."""
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ValueError(f"A must be a non-empty square matrix, got shape {A.shape}")
    n = A.shape[0]
    c = np.zeros(n) if c is None else np.array(c, dtype=float).ravel()
    if c.size != n:
        raise ValueError(f"c has length {c.size}, expected {n}")
    A.setflags(write=False)
    c.setflags(write=False)

    def F(u, t=0.0):
        return u @ A.T + c

    def jac(u, t=0.0):
        u = np.asarray(u)
        return np.broadcast_to(A, u.shape[:-1] + (n, n)).copy()

    return ReactionSystem(
        n=n,
        box=Box.whole_space(n),
        F=F,
        jac=jac,
        params=dict(A=A.tolist(), c=c.tolist()),
        label="linear",
    )


SYSTEMS: dict[str, Callable[..., ReactionSystem]] = {
    "example1": example1,
    "example2": example2,
    "linear": linear_system,
}


def build_system(label: str, params: Mapping[str, object] | None = None) -> ReactionSystem:
    try:
        factory = SYSTEMS[label]
    except KeyError:
        raise ValueError(f"unknown system {label!r}; choose from {sorted(SYSTEMS)}") from None
    return factory(**dict(params or {}))


@dataclass
class JacobianReport:
    max_rel_dev: float
    worst_point: np.ndarray
    samples: int
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_rel_dev <= self.tol


def fd_jacobian(sys: ReactionSystem, x, t: float = 0.0, h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian at a single point, step ``h * max(1, |x_j|)``."""
    x = np.asarray(x, dtype=float)
    J = np.empty((sys.n, sys.n))
    for j in range(sys.n):
        step = h * max(1.0, abs(x[j]))
        xp, xm = x.copy(), x.copy()
        xp[j] += step
        xm[j] -= step
        # divide by the representable step, not the requested one
        J[:, j] = (sys.F(xp, t) - sys.F(xm, t)) / (xp[j] - xm[j])
    return J


def validate_jacobian(sys: ReactionSystem, samples: int = 200, seed: int = 0,
                      tol: float = 5e-5, h: float = 1e-6,
                      window: tuple[float, float] = (0.01, 100.0)) -> JacobianReport:
    rng = np.random.default_rng(seed)
    points = sys.box.sample_interior(rng, samples, window)
    analytic = sys.jac(points, 0.0)
    worst, worst_x = 0.0, points[0]
    for x, J in zip(points, analytic):
        J_fd = fd_jacobian(sys, x, 0.0, h)
        dev = np.max(np.abs(J - J_fd)) / max(1.0, np.max(np.abs(J)))
        if dev > worst:
            worst, worst_x = float(dev), x
    return JacobianReport(worst, worst_x, samples, tol)
