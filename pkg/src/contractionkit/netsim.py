"""Diffusively coupled networks ``u' = F~(u) - (L kron D) u`` and trajectory-pair logging.

States are blocked arrays of shape ``(..., N, n)``: node ``i`` is ``u[..., i, :]``.
The coupling term is applied as ``(L @ u) * d``, i.e. the ``d_k``-scaled
Laplacian acting on each coordinate slice, so ``L kron D`` is never formed.
A 1D reaction-diffusion PDE with Neumann boundary is the special case where
``L`` is the scaled path-graph Laplacian from :func:`neumann_laplacian_1d`.
"""
from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .lognorm import DiagWeight, Weight, network_norm
from .matrix_core import as_symmetric
from .models import DiffusionSpec, ReactionSystem

log = logging.getLogger(__name__)

RK4_REAL_EXTENT = 2.5


class StabilityError(ValueError):
    pass


class IntegrationError(RuntimeError):
    def __init__(self, time: float):
        self.time = time
        super().__init__(f"non-finite state at t = {time:.6g}")


@dataclass(frozen=True)
class Laplacian:
    """Symmetric positive semidefinite matrix with zero row sums."""

    matrix: np.ndarray

    def __post_init__(self):
        L = as_symmetric(self.matrix, "Laplacian")
        scale = max(1.0, float(np.abs(L).max()))
        rows = np.abs(L.sum(axis=1)).max()
        if rows > 1e-10 * scale:
            raise ValueError(f"Laplacian rows must sum to zero (worst |row sum| = {rows:.3e})")
        lam = np.linalg.eigvalsh(L)
        if lam[0] < -1e-9 * scale:
            raise ValueError(f"Laplacian must be positive semidefinite (lambda_min = {lam[0]:.3e})")
        L.setflags(write=False)
        object.__setattr__(self, "matrix", L)
        object.__setattr__(self, "_lambda_max", float(lam[-1]))

    @classmethod
    def zero(cls, N: int) -> "Laplacian":
        return cls(np.zeros((N, N)))

    @property
    def N(self) -> int:
        return self.matrix.shape[0]

    @property
    def lambda_max(self) -> float:
        return self._lambda_max


def neumann_laplacian_1d(N: int, length: float = 1.0, grid: str = "vertex") -> tuple[Laplacian, float]:
    """Ghost-cell Neumann stencil on ``N`` nodes, scaled by ``1/h^2``.

    ``grid="vertex"`` puts nodes at both ends (``h = length/(N-1)``);
    ``grid="cell"`` puts them at cell centres (``h = length/N``), where the
    same stencil is second-order consistent with the no-flux condition.
    """
    if N < 2:
        raise ValueError(f"need at least 2 nodes, got {N}")
    if not length > 0:
        raise ValueError(f"length must be positive, got {length}")
    if grid == "vertex":
        h = length / (N - 1)
    elif grid == "cell":
        h = length / N
    else:
        raise ValueError(f"grid must be 'vertex' or 'cell', got {grid!r}")
    L = 2.0 * np.eye(N) - np.eye(N, k=1) - np.eye(N, k=-1)
    L[0, 0] = L[-1, -1] = 1.0
    return Laplacian(L / h**2), h


def grid_nodes(N: int, length: float = 1.0, grid: str = "vertex") -> np.ndarray:
    if grid == "vertex":
        return np.linspace(0.0, length, N)
    h = length / N
    return (np.arange(N) + 0.5) * h


def graph_laplacian(adjacency) -> Laplacian:
    """Degree matrix minus adjacency."""
    A = np.asarray(adjacency, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"adjacency must be square, got shape {A.shape}")
    A = as_symmetric(A, "adjacency")
    if np.any(A < 0):
        raise ValueError("adjacency weights must be nonnegative")
    if np.any(np.diag(A) != 0):
        raise ValueError("adjacency must have a zero diagonal")
    return Laplacian(np.diag(A.sum(axis=1)) - A)


@dataclass(frozen=True)
class NetworkSystem:
    """N identical nodes with reaction ``sys`` coupled through ``L`` and ``D``.

    ``cell_size`` marks a discretized PDE: norms then carry the factor
    ``h**(1/p)`` so that they approximate integral norms. ``lipschitz`` is
    an optional bound on ||J_F|| used by the step-size gate.
    """

    sys: ReactionSystem
    D: DiffusionSpec
    L: Laplacian
    cell_size: float | None = None
    lipschitz: float | None = None

    def __post_init__(self):
        if self.D.n != self.sys.n:
            raise ValueError(f"diffusion has {self.D.n} coefficients, system has n = {self.sys.n}")

    @property
    def N(self) -> int:
        return self.L.N

    @property
    def n(self) -> int:
        return self.sys.n

    def rhs(self, u: np.ndarray, t: float = 0.0) -> np.ndarray:
        return self.sys.F(u, t) - (self.L.matrix @ u) * self.D.d

    def blocked(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.ndim == 1:
            if u.size != self.N * self.n:
                raise ValueError(f"state length {u.size} != N*n = {self.N * self.n}")
            return u.reshape(self.N, self.n)
        if u.shape[-2:] != (self.N, self.n):
            raise ValueError(f"state shape {u.shape} does not end in (N, n) = {(self.N, self.n)}")
        return u

    def norm_scale(self, p) -> float:
        if self.cell_size is None:
            return 1.0
        return 1.0 if p in (np.inf, "inf") else self.cell_size ** (1.0 / p)


def estimate_lipschitz(sys: ReactionSystem, states) -> float:
    """Largest spectral norm of J_F over the given node states."""
    x = np.asarray(states, dtype=float).reshape(-1, sys.n)
    J = sys.jac(x, 0.0)
    return float(np.max(np.linalg.norm(J, ord=2, axis=(-2, -1))))


def stability_bound(net: NetworkSystem, dt: float, states=None) -> tuple[bool, float]:
    """Step-size gate ``dt <= 2.5 / (max_k d_k lambda_max(L) + L_F)``.

    ``L_F`` is ``net.lipschitz`` if set, else estimated from ``states``
    (e.g. the initial data), else taken as 0.
    """
    if net.lipschitz is not None:
        lip = net.lipschitz
    elif states is not None:
        lip = estimate_lipschitz(net.sys, states)
    else:
        lip = 0.0
    stiff = float(np.max(net.D.d)) * net.L.lambda_max + lip
    dt_max = math.inf if stiff == 0 else RK4_REAL_EXTENT / stiff
    return dt <= dt_max, dt_max


@dataclass
class Snapshots:
    times: np.ndarray
    states: np.ndarray  # (K, ..., N, n)
    clamps: np.ndarray  # cumulative clamp count at each snapshot
    dt: float


def integrate(net: NetworkSystem, u0, t_end: float, dt: float, stride: int = 1,
              t0: float = 0.0, check_stability: bool = True) -> Snapshots:
    """Classical fixed-step RK4; snapshots every ``stride`` steps.

    The step is shrunk so that a whole number of steps lands on ``t_end``.
    Components that leave the domain after a step are projected back and
    counted. ``u0`` may carry leading batch axes, all advanced in lockstep.
    """
    if not (dt > 0 and t_end > t0):
        raise ValueError("need dt > 0 and t_end > t0")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    u = np.array(net.blocked(u0), dtype=float)
    box = net.sys.box
    if not np.all(box.contains(u)):
        raise ValueError("initial state leaves the domain V")
    if check_stability:
        ok, dt_max = stability_bound(net, dt, u)
        if not ok:
            raise StabilityError(f"dt = {dt:.3g} exceeds the stability bound {dt_max:.3g}")
    steps = int(math.ceil((t_end - t0) / dt - 1e-9))
    h = (t_end - t0) / steps
    n_snap = steps // stride + 1 + (1 if steps % stride else 0)
    times = np.empty(n_snap)
    states = np.empty((n_snap,) + u.shape)
    clamps = np.zeros(n_snap, dtype=np.int64)
    times[0], states[0] = t0, u
    f = net.rhs
    total = 0
    k = 1
    bounded = bool(np.any(np.isfinite(box.lower)) or np.any(np.isfinite(box.upper)))
    for step in range(1, steps + 1):
        t = t0 + (step - 1) * h
        k1 = f(u, t)
        k2 = f(u + 0.5 * h * k1, t + 0.5 * h)
        k3 = f(u + 0.5 * h * k2, t + 0.5 * h)
        k4 = f(u + h * k3, t + h)
        u = u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if bounded:
            outside = (u < box.lower) | (u > box.upper)
            if outside.any():
                total += int(outside.sum())
                u = box.project(u)
        if step % stride == 0 or step == steps:
            if not np.all(np.isfinite(u)):
                raise IntegrationError(t + h)
            times[k], states[k], clamps[k] = t0 + step * h, u, total
            k += 1
    if total:
        log.warning("integration clamped %d state components back into V", total)
    return Snapshots(times, states, clamps, h)


@dataclass
class TrajectoryLog:
    times: np.ndarray
    norms: np.ndarray
    phi: np.ndarray | None
    clamps: np.ndarray
    p: object
    weight: Weight | DiagWeight | None
    dt: float
    fitted_rate: float = math.nan
    u_states: np.ndarray | None = field(default=None, repr=False)
    v_states: np.ndarray | None = field(default=None, repr=False)
    diffs: np.ndarray | None = field(default=None, repr=False)

    def csv_text(self) -> str:
        buf = io.StringIO()
        write_trajectory_csv(buf, [self])
        return buf.getvalue()

    def to_dict(self, snapshots: bool = False) -> dict:
        out = dict(
            p="inf" if self.p in (np.inf, "inf") else self.p,
            dt=self.dt,
            fitted_rate=self.fitted_rate,
            t=self.times.tolist(),
            norm=self.norms.tolist(),
            phi=None if self.phi is None else self.phi.tolist(),
            clamps=self.clamps.tolist(),
        )
        if snapshots and self.u_states is not None:
            out["u"] = self.u_states.tolist()
            out["v"] = self.v_states.tolist()
        return out


CSV_COLUMNS = ("pair", "t", "norm", "phi", "clamps")


def _fmt(x) -> str:
    return "" if x is None else format(float(x), ".17g")


def write_trajectory_csv(stream, logs) -> None:
    """One row per (pair, logged time); ``phi`` is blank unless p = 2."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for i, lg in enumerate(logs):
        for k, t in enumerate(lg.times):
            phi = None if lg.phi is None else lg.phi[k]
            writer.writerow([i, _fmt(t), _fmt(lg.norms[k]), _fmt(phi), int(lg.clamps[k])])


def pair_divergence(net: NetworkSystem, u0, v0, t_end: float, dt: float, p=2,
                    weight: Weight | DiagWeight | None = None, stride: int = 1,
                    keep_states: bool = False, check_stability: bool = True) -> TrajectoryLog:
    """Integrate two solutions with identical steps and log their weighted distance.

    The norm is the network norm of ``u - v`` (``||P w_i||_2`` per node for a
    :class:`Weight`, ``||Q w_i||_p`` for a :class:`DiagWeight`), including
    the ``h**(1/p)`` factor in PDE mode. ``phi`` is half the squared norm.
    """
    (lg,) = pair_divergences(net, [(u0, v0)], t_end, dt, p, weight, stride,
                             keep_states, check_stability)
    return lg


def pair_divergences(net: NetworkSystem, pairs, t_end: float, dt: float, p=2,
                     weight: Weight | DiagWeight | None = None, stride: int = 1,
                     keep_states: bool = False, check_stability: bool = True) -> list[TrajectoryLog]:
    """:func:`pair_divergence` for several ``(u0, v0)`` pairs advanced in one batch.

    Every trajectory takes exactly the same steps as it would alone.
    """
    batch = np.stack([np.stack([net.blocked(u0), net.blocked(v0)]) for u0, v0 in pairs])
    snaps = integrate(net, batch, t_end, dt, stride=stride, check_stability=check_stability)
    scale = net.norm_scale(p)
    logs = []
    for i in range(batch.shape[0]):
        u_states, v_states = snaps.states[:, i, 0], snaps.states[:, i, 1]
        diffs = u_states - v_states
        norms = np.atleast_1d(network_norm(diffs, net.n, p, weight, scale=scale))
        phi = 0.5 * norms**2 if p == 2 and isinstance(weight, Weight) else None
        lg = TrajectoryLog(snaps.times, norms, phi, snaps.clamps, p, weight, snaps.dt, diffs=diffs)
        if keep_states:
            lg.u_states, lg.v_states = u_states, v_states
        if np.all(norms > 0):
            lg.fitted_rate = fit_decay_rate(lg)
        logs.append(lg)
    return logs


def fit_decay_rate(log: TrajectoryLog, window: tuple[float, float] | None = None) -> float:
    """Least-squares slope of ln(norm) against t over ``window``."""
    t = np.asarray(log.times)
    y = np.asarray(log.norms)
    if window is not None:
        keep = (t >= window[0]) & (t <= window[1])
        t, y = t[keep], y[keep]
    if t.size < 2:
        raise ValueError("need at least two logged times in the window")
    if np.any(y <= 0):
        raise ValueError("zero norm inside the fit window; shrink the window")
    slope, _ = np.polyfit(t - t.mean(), np.log(y), 1)
    return float(slope)


@dataclass
class BoundReport:
    passed: bool
    worst_margin: float  # max over logged t of norm(t) / envelope(t) - 1
    worst_time: float
    tol: float

    def to_dict(self) -> dict:
        return dict(passed=self.passed, worst_margin=self.worst_margin,
                    worst_time=self.worst_time, tol=self.tol)


def check_contraction_bound(log: TrajectoryLog, mu: float, tol: float = 1e-5) -> BoundReport:
    """``norm(t) <= exp(mu (t - t0)) norm(t0) (1 + tol)`` at every logged time."""
    t = log.times
    envelope = np.exp(mu * (t - t[0])) * log.norms[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(envelope > 0, log.norms / envelope - 1.0,
                         np.where(log.norms > 0, np.inf, -1.0))
    k = int(np.argmax(ratio))
    return BoundReport(bool(ratio[k] <= tol), float(ratio[k]), float(t[k]), tol)


@dataclass
class PhiReport:
    passed: bool
    worst_margin: float  # max over steps of phi_{k+1} / (phi_k exp(2 mu dt_k)) - 1
    worst_time: float
    tol_step: float

    def to_dict(self) -> dict:
        return dict(passed=self.passed, worst_margin=self.worst_margin,
                    worst_time=self.worst_time, tol_step=self.tol_step)


def phi_monitor(log: TrajectoryLog, w: Weight, mu: float, tol_step: float | None = None) -> PhiReport:
    """Discrete form of ``dPhi/dt <= 2 mu Phi`` between consecutive samples."""
    if log.phi is None or not isinstance(log.weight, Weight):
        raise ValueError("phi_monitor needs a log recorded with p = 2 and a symmetric weight")
    if not np.allclose(log.weight.P, w.P, rtol=1e-12, atol=1e-12):
        raise ValueError("log was recorded with a different weight")
    if tol_step is None:
        tol_step = 1e-6 + log.dt**4
    phi = log.phi
    growth = np.exp(2.0 * mu * np.diff(log.times))
    allowed = phi[:-1] * growth
    with np.errstate(divide="ignore", invalid="ignore"):
        margin = np.where(allowed > 0, phi[1:] / allowed - 1.0, np.where(phi[1:] > 0, np.inf, -1.0))
    if margin.size == 0:
        return PhiReport(True, -1.0, float(log.times[0]), tol_step)
    k = int(np.argmax(margin))
    return PhiReport(bool(margin[k] <= tol_step), float(margin[k]), float(log.times[k + 1]), tol_step)


def coupling_dissipation(w_state, L: Laplacian, Q, D: DiffusionSpec) -> np.ndarray:
    """``w^T (L kron Q D) w`` for blocked ``w`` of shape ``(..., N, n)``."""
    w_state = np.asarray(w_state, dtype=float)
    QD = np.asarray(Q) * D.d[None, :]
    return np.sum(w_state * ((L.matrix @ w_state) @ QD.T), axis=(-2, -1))
