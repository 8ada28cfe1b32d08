"""Run configuration: one JSON document describing system, weight, coupling, sweep and simulation."""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .certificates import SweepSpec, default_sweep, example1_Q, example1_weight
from .lognorm import DiagWeight, Weight
from .models import DiffusionSpec, ReactionSystem, build_system
from .netsim import Laplacian, NetworkSystem, graph_laplacian, neumann_laplacian_1d


class ConfigError(ValueError):
    def __init__(self, where: str, message: str):
        self.where = where
        super().__init__(f"{where}: {message}")


def _get(tree: dict, path: str, default=...):
    node: Any = tree
    for key in path.split("."):
        if not isinstance(node, dict) or key not in node:
            if default is ...:
                raise ConfigError(path, "missing required field")
            return default
        node = node[key]
    return node


def parse_matrix(value, where: str, shape=None) -> np.ndarray:
    try:
        M = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(where, "expected a nested array of numbers") from None
    if M.ndim != 2:
        raise ConfigError(where, f"expected a 2D array, got {M.ndim}D")
    if shape is not None and M.shape != shape:
        raise ConfigError(where, f"expected shape {shape}, got {M.shape}")
    return M


def parse_vector(value, where: str, length=None) -> np.ndarray:
    try:
        v = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(where, "expected an array of numbers") from None
    if v.ndim != 1:
        raise ConfigError(where, "expected a flat array")
    if length is not None and v.size != length:
        raise ConfigError(where, f"expected {length} entries, got {v.size}")
    return v


@dataclass
class RunConfig:
    """Parsed configuration; ``raw`` keeps the JSON tree for sweeps and provenance."""

    raw: dict
    base_dir: Path = field(default_factory=Path.cwd)

    @classmethod
    def load(cls, path) -> "RunConfig":
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(str(path), f"cannot read config ({exc.strerror})") from None
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from None
        if not isinstance(raw, dict):
            raise ConfigError(str(path), "top level must be an object")
        cfg = cls(raw, path.parent.resolve())
        cfg.validate()
        return cfg

    def with_overrides(self, **values) -> "RunConfig":
        """Copy with dotted-path overrides, e.g. ``{"sim.seed": 3}``."""
        raw = copy.deepcopy(self.raw)
        for dotted, value in values.items():
            node = raw
            *head, last = dotted.split(".")
            for key in head:
                node = node.setdefault(key, {})
            node[last] = value
        return RunConfig(raw, self.base_dir)

    def validate(self) -> None:
        sys = self.system()
        self.weight(sys)
        self.diffusion(sys)
        self.network(sys)
        self.sweep(sys)

    # -- builders --

    def system(self) -> ReactionSystem:
        label = _get(self.raw, "system.label")
        params = _get(self.raw, "system.params", {})
        if not isinstance(params, dict):
            raise ConfigError("system.params", "expected an object")
        try:
            return build_system(label, params)
        except (TypeError, ValueError) as exc:
            raise ConfigError("system", str(exc)) from None

    def weight(self, sys: ReactionSystem) -> Weight | DiagWeight:
        spec = _get(self.raw, "weight", {"kind": "identity"})
        kind = spec.get("kind", "identity")
        try:
            if kind == "identity":
                return Weight.identity(sys.n)
            if kind == "matrix":
                if "P" in spec:
                    return Weight.from_P(parse_matrix(spec["P"], "weight.P", (sys.n, sys.n)))
                return Weight.from_Q(parse_matrix(_get(spec, "Q"), "weight.Q", (sys.n, sys.n)))
            if kind == "diagonal":
                diag = parse_vector(_get(spec, "Q"), "weight.Q", sys.n)
                return DiagWeight(diag)
            if kind == "example1":
                if "q" in spec:
                    return Weight.from_Q(example1_Q(float(spec["q"])))
                delta = float(spec.get("delta", sys.params.get("delta", 1.0)))
                k1 = float(spec.get("k1", sys.params.get("k1", 1.0)))
                return example1_weight(delta, k1, float(_get(spec, "margin")))
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError("weight", str(exc)) from None
        raise ConfigError("weight.kind", f"unknown weight kind {kind!r}")

    def symmetric_weight(self, sys: ReactionSystem) -> Weight:
        """The p = 2 weight; a diagonal weight Q is read as the Lyapunov matrix."""
        w = self.weight(sys)
        return Weight.from_Q(w.matrix) if isinstance(w, DiagWeight) else w

    def diffusion(self, sys: ReactionSystem) -> DiffusionSpec:
        d = _get(self.raw, "diffusion", [1.0] * sys.n)
        if isinstance(d, (int, float)):
            d = [float(d)] * sys.n
        try:
            return DiffusionSpec(parse_vector(d, "diffusion", sys.n))
        except ValueError as exc:
            raise ConfigError("diffusion", str(exc)) from None

    def laplacian(self) -> tuple[Laplacian, float | None]:
        topo = _get(self.raw, "topology", {"kind": "none"})
        kind = topo.get("kind", "none")
        try:
            if kind == "none":
                return Laplacian.zero(int(topo.get("N", 1))), None
            if kind == "neumann1d":
                L, h = neumann_laplacian_1d(int(_get(topo, "N")), float(topo.get("length", 1.0)),
                                            topo.get("grid", "vertex"))
                return L, h
            if kind == "graph":
                return graph_laplacian(self._adjacency(_get(topo, "adjacency"))), None
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError("topology", str(exc)) from None
        raise ConfigError("topology.kind", f"unknown topology {kind!r}")

    def _adjacency(self, value) -> np.ndarray:
        if isinstance(value, list):
            return parse_matrix(value, "topology.adjacency")
        path = Path(value)
        if not path.is_absolute():
            path = self.base_dir / path
        if not path.exists():
            raise ConfigError("topology.adjacency", f"file not found: {path}")
        try:
            if path.suffix == ".json":
                return parse_matrix(json.loads(path.read_text()), "topology.adjacency")
            return np.atleast_2d(np.loadtxt(path, delimiter="," if path.suffix == ".csv" else None))
        except (ValueError, json.JSONDecodeError) as exc:
            raise ConfigError(f"topology.adjacency ({path})", str(exc)) from None

    def network(self, sys: ReactionSystem) -> NetworkSystem:
        L, h = self.laplacian()
        lip = _get(self.raw, "sim.lipschitz", None)
        return NetworkSystem(sys, self.diffusion(sys), L, cell_size=h,
                             lipschitz=None if lip is None else float(lip))

    def sweep(self, sys: ReactionSystem) -> SweepSpec:
        spec = _get(self.raw, "sweep", None)
        if spec is None:
            return default_sweep(sys)
        default = default_sweep(sys, int(spec.get("count", 100)))
        try:
            out = SweepSpec(
                counts=tuple(spec.get("counts", default.counts)),
                windows=tuple(tuple(w) for w in spec.get("windows", default.windows)),
                seed=int(spec.get("seed", 0)),
                mode=spec.get("mode", "lattice"),
            )
            out.check_against(sys)
        except (TypeError, ValueError) as exc:
            raise ConfigError("sweep", str(exc)) from None
        return out

    # -- simulation block --

    def sim(self, key: str, default=...):
        return _get(self.raw, f"sim.{key}", default)

    def initial_pairs(self, net: NetworkSystem) -> list[tuple[np.ndarray, np.ndarray]]:
        """Initial conditions: explicit ``u0``/``v0`` or seeded uniform draws in a box."""
        init = self.sim("init", {"kind": "random"})
        kind = init.get("kind", "random")
        if kind == "explicit":
            u0 = net.blocked(parse_matrix(_get(init, "u0"), "sim.init.u0", (net.N, net.n)))
            v0 = net.blocked(parse_matrix(_get(init, "v0"), "sim.init.v0", (net.N, net.n)))
            return [(u0, v0)]
        if kind != "random":
            raise ConfigError("sim.init.kind", f"unknown initial condition kind {kind!r}")
        box = net.sys.box
        low = parse_vector(init.get("low", np.where(np.isfinite(box.lower), box.lower, -1.0)),
                      "sim.init.low", net.n)
        default_high = np.where(np.isfinite(box.upper), box.upper, low + 2.0)
        high = parse_vector(init.get("high", default_high), "sim.init.high", net.n)
        if np.any(low > high) or not (np.all(box.contains(low)) and np.all(box.contains(high))):
            raise ConfigError("sim.init", "initial box must lie inside the domain V")
        rng = np.random.default_rng(int(self.sim("seed", 0)))
        pairs = []
        for _ in range(int(self.sim("pairs", 1))):
            u0 = rng.uniform(low, high, size=(net.N, net.n))
            v0 = rng.uniform(low, high, size=(net.N, net.n))
            pairs.append((u0, v0))
        return pairs
