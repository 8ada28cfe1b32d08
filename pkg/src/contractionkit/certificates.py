"""Contraction certificates: Lyapunov inequalities, domain sweeps and the two worked examples.

The matrix inequality ``Q A + A^T Q <= 2 mu Q`` is checked by congruence with
``P^{-1}`` (``P = Q^{1/2}``), which turns the generalized eigenproblem into
an ordinary symmetric one without changing its inertia.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .lognorm import DiagWeight, Weight, mu1_weighted, mu2_weighted, muinf_weighted
from .matrix_core import NotPositiveDefiniteError, as_square, as_symmetric, is_positive_definite, sqrt_pd_pair
from .models import DiffusionSpec, ReactionSystem


@dataclass(frozen=True)
class SweepSpec:
    """Finite sample set standing in for the (possibly unbounded) domain V.

    ``windows`` gives one closed interval per coordinate; ``counts`` the
    lattice resolution per coordinate (random mode draws ``prod(counts)``
    points uniformly in the windows).
    """

    counts: tuple[int, ...]
    windows: tuple[tuple[float, float], ...]
    seed: int = 0
    mode: str = "lattice"

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        windows = tuple((float(lo), float(hi)) for lo, hi in self.windows)
        if len(counts) != len(windows):
            raise ValueError("counts and windows must have one entry per coordinate")
        if any(c < 2 for c in counts):
            raise ValueError(f"sweep needs at least 2 samples per coordinate, got {counts}")
        for lo, hi in windows:
            if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
                raise ValueError(f"sweep window must be a finite interval, got {(lo, hi)}")
        if self.mode not in ("lattice", "random"):
            raise ValueError(f"sweep mode must be 'lattice' or 'random', got {self.mode!r}")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "windows", windows)

    def check_against(self, sys: ReactionSystem) -> None:
        if len(self.counts) != sys.n:
            raise ValueError(f"sweep has {len(self.counts)} coordinates, system has n = {sys.n}")
        for i, (lo, hi) in enumerate(self.windows):
            if lo < sys.box.lower[i] or hi > sys.box.upper[i]:
                raise ValueError(
                    f"sweep window {i} = {(lo, hi)} leaves the domain "
                    f"[{sys.box.lower[i]}, {sys.box.upper[i]}]"
                )

    def points(self) -> np.ndarray:
        if self.mode == "lattice":
            axes = [np.linspace(lo, hi, c) for c, (lo, hi) in zip(self.counts, self.windows)]
            grid = np.meshgrid(*axes, indexing="ij")
            return np.stack([g.ravel() for g in grid], axis=-1)
        rng = np.random.default_rng(self.seed)
        lo = np.array([w[0] for w in self.windows])
        hi = np.array([w[1] for w in self.windows])
        return rng.uniform(lo, hi, size=(int(np.prod(self.counts)), len(self.counts)))

    def to_dict(self) -> dict:
        return dict(counts=list(self.counts), windows=[list(w) for w in self.windows],
                    seed=self.seed, mode=self.mode)


def default_sweep(sys: ReactionSystem, count: int = 100, truncation: float = 10.0) -> SweepSpec:
    """Lattice over the box with each infinite bound replaced by ``truncation`` away."""
    windows = []
    for lo, hi in zip(sys.box.lower, sys.box.upper):
        if not math.isfinite(lo) and not math.isfinite(hi):
            lo, hi = -truncation, truncation
        elif not math.isfinite(hi):
            hi = lo + truncation
        elif not math.isfinite(lo):
            lo = hi - truncation
        windows.append((lo, hi))
    return SweepSpec((count,) * sys.n, tuple(windows))


# -- Lyapunov inequality ----------------------------------------------------------


def lyapunov_residual(A, Q, mu: float) -> float:
    """lambda_max(P^{-1} (Q A + A^T Q - 2 mu Q) P^{-1}); <= 0 iff the inequality holds."""
    A = as_square(A, "A")
    Q = as_symmetric(Q, "Q")
    _, P_inv = sqrt_pd_pair(Q)
    M = Q @ A + A.T @ Q - 2.0 * mu * Q
    C = P_inv @ M @ P_inv
    return float(np.linalg.eigvalsh(0.5 * (C + C.T))[-1])


def mu_from_lyapunov(A, Q) -> float:
    """Smallest mu with ``Q A + A^T Q <= 2 mu Q``, i.e. mu_{2,P}(A) for P = Q^{1/2}."""
    return mu2_weighted(as_square(A, "A"), Weight.from_Q(Q))


def remark_convert(Q, mu: float) -> tuple[float, float]:
    """Constants for ``QA + A^TQ <= mu Q  =>  <= beta I  =>  <= gamma Q``.

    The multipliers are chosen by sign so that both implications hold for any
    real ``mu``: beta uses lambda_min(Q) when mu <= 0 and lambda_max(Q)
    otherwise; gamma divides by lambda_max(Q) when beta <= 0 and by
    lambda_min(Q) otherwise.
    """
    Q = as_symmetric(Q, "Q")
    ok, lam_min = is_positive_definite(Q)
    if not ok:
        raise NotPositiveDefiniteError(lam_min)
    lam_max = float(np.linalg.eigvalsh(Q)[-1])
    beta = mu * lam_min if mu <= 0 else mu * lam_max
    gamma = beta / lam_max if beta <= 0 else beta / lam_min
    return float(beta), float(gamma)


def check_diffusion_compat(w: Weight, D: DiffusionSpec, tol: float | None = None) -> tuple[bool, float]:
    """Whether ``Q D + D Q`` is positive definite, with its smallest eigenvalue."""
    if w.n != D.n:
        raise ValueError(f"weight is {w.n}x{w.n} but diffusion has {D.n} coefficients")
    QD = w.Q * D.d[None, :]
    return is_positive_definite(QD + QD.T, tol)


# -- domain sweeps ----------------------------------------------------------------


def _measure_values(J: np.ndarray, weight, p) -> np.ndarray:
    if isinstance(weight, Weight):
        if p != 2:
            raise ValueError("a symmetric weight supports p = 2 only")
        return np.atleast_1d(mu2_weighted(J, weight))
    if p == 1:
        return np.atleast_1d(mu1_weighted(J, weight))
    if p in (np.inf, "inf"):
        return np.atleast_1d(muinf_weighted(J, weight))
    return np.atleast_1d(mu2_weighted(J, Weight.from_P(weight.matrix)))


def sup_mu_over_domain(sys: ReactionSystem, w: Weight | DiagWeight, spec: SweepSpec,
                       p=2, t: float = 0.0, jobs: int = 1) -> tuple[float, np.ndarray]:
    """Largest sampled logarithmic norm of J_F and the point attaining it.

    The result is a lower bound for the true supremum over V. Ties resolve to
    the first point in sweep order, so the answer does not depend on ``jobs``.
    """
    spec.check_against(sys)
    points = spec.points()
    if points.shape[0] == 0:
        raise ValueError("empty sweep")

    def chunk_max(idx):
        vals = _measure_values(sys.jac(points[idx], t), w, p)
        k = int(np.argmax(vals))
        return float(vals[k]), int(idx[k])

    chunks = np.array_split(np.arange(points.shape[0]), max(1, jobs))
    chunks = [c for c in chunks if c.size]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(chunk_max, chunks))
    else:
        results = [chunk_max(c) for c in chunks]
    value, index = max(results, key=lambda r: (r[0], -r[1]))
    return value, points[index].copy()


@dataclass
class ContractionCertificate:
    weight: Weight
    diffusion: DiffusionSpec
    mu_sup: float
    argmax_point: np.ndarray
    diffusion_ok: bool
    diffusion_lambda_min: float
    sample_spec: SweepSpec
    system_label: str = ""
    system_params: dict = field(default_factory=dict)

    @property
    def verdict(self) -> bool:
        return self.mu_sup < 0 and self.diffusion_ok

    def to_dict(self) -> dict:
        return dict(
            system=dict(label=self.system_label, params=self.system_params),
            weight=dict(P=self.weight.P.tolist(), Q=self.weight.Q.tolist()),
            diffusion=self.diffusion.d.tolist(),
            mu_sup=self.mu_sup,
            argmax_point=self.argmax_point.tolist(),
            diffusion_ok=self.diffusion_ok,
            diffusion_lambda_min=self.diffusion_lambda_min,
            sweep=self.sample_spec.to_dict(),
            verdict="pass" if self.verdict else "fail",
            note="mu_sup is a sampled maximum, a lower bound on the supremum over the domain",
        )


def certify_contraction(sys: ReactionSystem, w: Weight, D: DiffusionSpec,
                        spec: SweepSpec | None = None, jobs: int = 1) -> ContractionCertificate:
    spec = spec or default_sweep(sys)
    mu_sup, point = sup_mu_over_domain(sys, w, spec, jobs=jobs)
    ok, lam = check_diffusion_compat(w, D)
    return ContractionCertificate(
        weight=w, diffusion=D, mu_sup=mu_sup, argmax_point=point,
        diffusion_ok=ok, diffusion_lambda_min=lam, sample_spec=spec,
        system_label=sys.label, system_params=dict(sys.params),
    )


# -- first worked example: non-diagonal weight ---------------------------------------


def example1_threshold(delta: float, k1: float) -> float:
    return 1.0 + delta / (4.0 * k1)


def example1_Q(q: float) -> np.ndarray:
    return np.array([[1.0, 1.0], [1.0, float(q)]])


def example1_weight(delta: float, k1: float, margin: float) -> Weight:
    """Weight with Q = [[1, 1], [1, q]], q = 1 + delta/(4 k1) + margin."""
    if not margin > 0:
        raise ValueError(f"margin must be > 0, got {margin}")
    if not (delta > 0 and k1 > 0):
        raise ValueError("delta and k1 must be positive")
    return Weight.from_Q(example1_Q(example1_threshold(delta, k1) + margin))


def example1_det(q: float, delta: float, a, b):
    """det(Q J + J^T Q) = 4 delta b (q - 1) - (-delta + (q - 1) a)^2."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    val = 4.0 * delta * b * (q - 1.0) - (-delta + (q - 1.0) * a) ** 2
    return float(val) if val.ndim == 0 else val


@dataclass
class AnalyticVerdict:
    q: float
    candidates: list[tuple[float, float, float]]  # (a, b, det)
    trace_negative: bool

    @property
    def passed(self) -> bool:
        return self.trace_negative and all(det > 0 for _, _, det in self.candidates)


def example1_analytic_verdict(q: float, S_Y: float, k1: float, k2: float, delta: float) -> AnalyticVerdict:
    """Sign of Q J + J^T Q < 0 over all of V, decided at the extremal (a, b).

    The determinant is concave in ``a`` on ``[0, k2 S_Y]`` and increasing in
    ``b >= k1``, so its minimum over V sits at ``b = k1`` and an endpoint in
    ``a``. The interior vertex ``a = delta/(q-1)`` is listed when feasible.
    """
    a_hi = k2 * S_Y
    a_values = [0.0, a_hi]
    if q > 1 and 0 < delta / (q - 1) < a_hi:
        a_values.append(delta / (q - 1))
    candidates = [(a, k1, example1_det(q, delta, a, k1)) for a in a_values]
    # trace = -2 delta - 2 b (q - 1) is largest at b = k1
    trace_negative = -2 * delta - 2 * k1 * (q - 1) < 0
    return AnalyticVerdict(float(q), candidates, trace_negative)


# -- second worked example: no symmetric weight works --------------------------------


@dataclass
class FeedbackConditionReport:
    condition1: bool
    condition2: bool
    condition3: bool
    worst1: float
    worst1_at: float
    worst2: float
    worst2_at: float
    ratios: dict[float, list[float]]
    witnesses: dict[str, object]

    @property
    def all_hold(self) -> bool:
        return self.condition1 and self.condition2 and self.condition3

    def to_dict(self) -> dict:
        return dict(
            condition1=self.condition1, condition2=self.condition2, condition3=self.condition3,
            worst1=self.worst1, worst1_at=self.worst1_at,
            worst2=self.worst2, worst2_at=self.worst2_at,
            ratios={f"{k:g}": v for k, v in self.ratios.items()},
            witnesses=self.witnesses,
        )


CONDITION3_DECADES = (1e2, 1e3, 1e4)


def check_lemma_conditions(sys: ReactionSystem, lam: float, mu: float,
                           spec: SweepSpec | None = None,
                           threshold: float = 1.0,
                           p0_grid=tuple(range(-10, 11)),
                           decades=CONDITION3_DECADES) -> FeedbackConditionReport:
    """Check the three hypotheses that rule out every symmetric weight.

    1. ``-f1'(x) + lam |f2'(x)| < -mu`` over the sampled x,
    2. ``-g2'(y) + |g1'(y)| / lam < -mu`` over the sampled y,
    3. ``(g1' - p0 g2')^2 / g2'`` strictly increases across ``decades`` and
       ends above ``threshold``, for every ``p0`` in ``p0_grid``.

    Condition 3 is a limit; the decade test is its finite stand-in.
    """
    dec = sys.decomposition
    if dec is None:
        raise ValueError(f"system {sys.label!r} has no (f1, g1, f2, g2) decomposition")
    if not (lam > 0 and mu > 0):
        raise ValueError("lam and mu must be positive")
    spec = spec or default_sweep(sys)
    spec.check_against(sys)
    xs = np.linspace(*spec.windows[0], spec.counts[0])
    ys = np.linspace(*spec.windows[1], spec.counts[1])

    lhs1 = -dec.df1(xs) + lam * np.abs(dec.df2(xs))
    k1 = int(np.argmax(lhs1))
    lhs2 = -dec.dg2(ys) + np.abs(dec.dg1(ys)) / lam
    k2 = int(np.argmax(lhs2))
    cond1 = bool(lhs1[k1] < -mu)
    cond2 = bool(lhs2[k2] < -mu)

    witnesses: dict[str, object] = {}
    if not cond1:
        witnesses["condition1"] = dict(x=float(xs[k1]), value=float(lhs1[k1]), bound=-mu)
    if not cond2:
        witnesses["condition2"] = dict(y=float(ys[k2]), value=float(lhs2[k2]), bound=-mu)

    yd = np.asarray(decades, dtype=float)
    ratios = {}
    cond3 = True
    for p0 in p0_grid:
        r = (dec.dg1(yd) - p0 * dec.dg2(yd)) ** 2 / dec.dg2(yd)
        ratios[float(p0)] = r.tolist()
        if not (np.all(np.diff(r) > 0) and r[-1] > threshold):
            if cond3:
                witnesses["condition3"] = dict(p0=float(p0), y=yd.tolist(), ratio=r.tolist(),
                                               threshold=threshold)
            cond3 = False
    return FeedbackConditionReport(cond1, cond2, cond3, float(lhs1[k1]), float(xs[k1]),
                       float(lhs2[k2]), float(ys[k2]), ratios, witnesses)


@dataclass
class IndefinitePoint:
    point: np.ndarray
    mu_value: float

    def to_dict(self) -> dict:
        return dict(point=self.point.tolist(), mu_value=self.mu_value)


def indefinite_search_points(sys: ReactionSystem, x0: float = 0.01, y_min: float = 1e-3,
                             y_max: float = 1e4, count: int = 600) -> np.ndarray:
    """Default search path: first coordinate fixed, second log-spaced."""
    lo = sys.box.lower
    x = lo[0] + x0 if math.isfinite(lo[0]) else x0
    y0 = lo[1] if math.isfinite(lo[1]) else 0.0
    ys = y0 + np.logspace(math.log10(y_min), math.log10(y_max), count)
    return np.stack([np.full(count, x), ys], axis=-1)


def find_indefinite_point(sys: ReactionSystem, P, search: SweepSpec | np.ndarray | None = None,
                          **path) -> IndefinitePoint | None:
    """First point where ``P J + J^T P`` fails to be negative definite.

    ``P`` plays the role of the Lyapunov matrix, so the reported value is
    mu_{2,P^{1/2}}(J); it is >= 0 exactly at such points. ``search`` is a
    sweep, an explicit ``(M, 2)`` array, or None for the default path
    (keyword overrides go to :func:`indefinite_search_points`).
    """
    if sys.n != 2:
        raise ValueError("find_indefinite_point needs a two-dimensional system")
    w = Weight.from_Q(P)
    if search is None:
        points = indefinite_search_points(sys, **path)
    elif isinstance(search, SweepSpec):
        search.check_against(sys)
        points = search.points()
    else:
        points = np.asarray(search, dtype=float)
    values = np.atleast_1d(mu2_weighted(sys.jac(points, 0.0), w))
    hits = np.flatnonzero(values >= 0)
    if hits.size == 0:
        return None
    k = int(hits[0])
    return IndefinitePoint(points[k].copy(), float(values[k]))


def random_pd(n: int, rng: np.random.Generator, shift: float = 0.1) -> np.ndarray:
    """G^T G + shift I with standard normal G."""
    G = rng.standard_normal((n, n))
    return G.T @ G + shift * np.eye(n)
