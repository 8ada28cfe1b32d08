"""Batch front end: ``contractionkit {certify,counterexample,simulate,sweep} --config run.json``.

Exit codes: 0 pass, 1 usage/config/runtime error, 2 the analysis ran and the
verdict is negative.
"""
from __future__ import annotations

import argparse
import csv
import itertools
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import serialize
from .certificates import (
    certify_contraction,
    check_lemma_conditions,
    find_indefinite_point,
    random_pd,
    sup_mu_over_domain,
)
from .config import ConfigError, RunConfig, parse_matrix
from .lognorm import DiagWeight
from .netsim import (
    IntegrationError,
    StabilityError,
    check_contraction_bound,
    pair_divergences,
    phi_monitor,
    write_trajectory_csv,
)

log = logging.getLogger("contractionkit")

EXIT_PASS, EXIT_ERROR, EXIT_FAIL = 0, 1, 2

EPILOG = """\
outputs (written to --out):
  certify         certificate.json  weight P/Q, mu_sup, argmax_point, diffusion check, verdict
  counterexample  witness.json      feedback conditions, ratios, indefinite point
  simulate        trajectory.csv    columns: pair, t, norm, phi, clamps
                                    (phi blank unless p = 2; clamps cumulative)
                  simulate.json     mu used, bound and phi reports, fitted rates
  sweep           sweep.csv         columns: index, <grid params...>, then
                                    certify: mu_sup, diffusion_lambda_min, verdict
                                    simulate: mu, worst_margin, fitted_rate, verdict
environment:
  CONTRACTIONKIT_LOG=quiet|info|debug
"""


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "pass" if x else "fail"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _fmt_input(x) -> str:
    return repr(float(x)) if isinstance(x, float) else _fmt(x)


# -- commands -------------------------------------------------------------------------


def run_certify(cfg: RunConfig, jobs: int = 1) -> tuple[bool, dict]:
    sys_ = cfg.system()
    w = cfg.symmetric_weight(sys_)
    cert = certify_contraction(sys_, w, cfg.diffusion(sys_), cfg.sweep(sys_), jobs=jobs)
    return cert.verdict, cert.to_dict()


def cmd_certify(cfg: RunConfig, out: Path, jobs: int = 1) -> int:
    ok, doc = run_certify(cfg, jobs)
    serialize.dump(doc, out / "certificate.json")
    log.info("mu_sup = %.6g, diffusion lambda_min = %.6g, verdict %s",
             doc["mu_sup"], doc["diffusion_lambda_min"], doc["verdict"])
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_counterexample(cfg: RunConfig, out: Path, jobs: int = 1) -> int:
    sys_ = cfg.system()
    spec = cfg.raw.get("counterexample", {})
    seed = int(spec.get("seed", cfg.sim("seed", 0)))
    if "P" in spec:
        P = parse_matrix(spec["P"], "counterexample.P", (sys_.n, sys_.n))
    else:
        P = random_pd(sys_.n, np.random.default_rng(seed))
    doc: dict = dict(system=dict(label=sys_.label, params=dict(sys_.params)), P=P.tolist())
    conditions_hold = False
    if sys_.decomposition is not None:
        report = check_lemma_conditions(
            sys_, float(spec.get("lambda", 1.0)), float(spec.get("mu", 0.25)),
            cfg.sweep(sys_), threshold=float(spec.get("threshold", 1.0)),
        )
        doc["conditions"] = report.to_dict()
        conditions_hold = report.all_hold
    else:
        doc["conditions"] = None
    path = {k: float(spec[k]) for k in ("x0", "y_min", "y_max") if k in spec}
    hit = find_indefinite_point(sys_, P, **path)
    doc["indefinite_point"] = None if hit is None else hit.to_dict()
    reproduced = conditions_hold and hit is not None
    doc["reproduced"] = reproduced
    serialize.dump(doc, out / "witness.json")
    return EXIT_PASS if reproduced else EXIT_FAIL


def _sim_weight(cfg: RunConfig, sys_, p):
    w = cfg.weight(sys_)
    if p == 2:
        return cfg.symmetric_weight(sys_)
    if isinstance(w, DiagWeight):
        return w
    if np.allclose(w.P, np.eye(sys_.n)):
        return DiagWeight.ones(sys_.n)
    raise ConfigError("weight", "p = 1 or inf needs a diagonal (or identity) weight")


def run_simulate(cfg: RunConfig, jobs: int = 1) -> tuple[bool, dict, list]:
    sys_ = cfg.system()
    net = cfg.network(sys_)
    p_raw = cfg.sim("p", 2)
    p = np.inf if p_raw in ("inf", float("inf")) else int(p_raw)
    if p not in (1, 2, np.inf):
        raise ConfigError("sim.p", f"unsupported norm order {p_raw!r}")
    w = _sim_weight(cfg, sys_, p)
    mu = cfg.sim("mu", None)
    if mu is None:
        mu, _ = sup_mu_over_domain(sys_, w, cfg.sweep(sys_), p=p, jobs=jobs)
    mu = float(mu)
    pairs = cfg.initial_pairs(net)
    logs = pair_divergences(net, pairs, float(cfg.sim("t_end")), float(cfg.sim("dt")), p, w,
                            stride=int(cfg.sim("stride", 1)))
    tol = float(cfg.sim("tol", 1e-5))
    bounds = [check_contraction_bound(lg, mu, tol) for lg in logs]
    phis = [phi_monitor(lg, w, mu) for lg in logs] if p == 2 else []
    ok = all(b.passed for b in bounds) and all(r.passed for r in phis)
    worst = max(bounds, key=lambda b: b.worst_margin)
    doc = dict(
        mu=mu, p="inf" if p == np.inf else p, tol=tol,
        bound=[b.to_dict() for b in bounds],
        phi=[r.to_dict() for r in phis],
        fitted_rate=[lg.fitted_rate for lg in logs],
        clamps=[int(lg.clamps[-1]) for lg in logs],
        worst_margin=worst.worst_margin, worst_time=worst.worst_time,
        verdict="pass" if ok else "fail",
    )
    return ok, doc, logs


def cmd_simulate(cfg: RunConfig, out: Path, jobs: int = 1) -> int:
    ok, doc, logs = run_simulate(cfg, jobs)
    with open(out / "trajectory.csv", "w", newline="", encoding="utf-8") as fh:
        write_trajectory_csv(fh, logs)
    outputs = cfg.raw.get("outputs", {})
    if "json" in outputs.get("formats", []):
        snap = bool(outputs.get("snapshots", False))
        serialize.dump([lg.to_dict(snap) for lg in logs], out / "trajectory.json")
    serialize.dump(doc, out / "simulate.json")
    if not ok:
        log.warning("bound violated: worst margin %.3g at t = %.6g", doc["worst_margin"], doc["worst_time"])
    return EXIT_PASS if ok else EXIT_FAIL


SYSTEM_PARAMS = ("S_Y", "k1", "k2", "delta", "z", "epsilon")


def grid_overrides(name: str, value) -> dict:
    """Map one grid parameter to dotted config overrides."""
    if name == "q":
        return {"weight": {"kind": "example1", "q": value}}
    if name == "margin":
        return {"weight": {"kind": "example1", "margin": value}}
    if name == "d":
        return {"diffusion": value}
    if name == "N":
        return {"topology.N": value}
    if name in SYSTEM_PARAMS:
        return {f"system.params.{name}": value}
    if "." in name:
        return {name: value}
    raise ConfigError(f"grid.params.{name}", "unknown sweep parameter")


def _sweep_row(args) -> list:
    raw, base_dir, task = args
    cfg = RunConfig(raw, Path(base_dir))
    if task == "certify":
        ok, doc = run_certify(cfg)
        return [doc["mu_sup"], doc["diffusion_lambda_min"], ok]
    ok, doc, _ = run_simulate(cfg)
    rates = [r for r in doc["fitted_rate"] if np.isfinite(r)]
    return [doc["mu"], doc["worst_margin"], max(rates) if rates else float("nan"), ok]


def cmd_sweep(cfg: RunConfig, out: Path, jobs: int = 1) -> int:
    grid = cfg.raw.get("grid", {})
    params = grid.get("params", {})
    task = grid.get("task", "certify")
    if task not in ("certify", "simulate"):
        raise ConfigError("grid.task", f"unknown task {task!r}")
    if not params or any(not isinstance(v, list) or not v for v in params.values()):
        raise ConfigError("grid.params", "sweep grid is empty")
    names = list(params)
    points = list(itertools.product(*(params[k] for k in names)))
    tasks = []
    for values in points:
        overrides = {}
        for name, value in zip(names, values):
            overrides.update(grid_overrides(name, value))
        row_cfg = cfg.with_overrides(**overrides)
        row_cfg.validate()
        tasks.append((row_cfg.raw, str(row_cfg.base_dir), task))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_row, tasks))
    else:
        rows = [_sweep_row(t) for t in tasks]
    tail = (["mu_sup", "diffusion_lambda_min", "verdict"] if task == "certify"
            else ["mu", "worst_margin", "fitted_rate", "verdict"])
    with open(out / "sweep.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["index", *names, *tail])
        for i, (values, row) in enumerate(zip(points, rows)):
            # grid inputs echo as typed (shortest round-trip); results use 17 digits
            writer.writerow([i, *map(_fmt_input, values), *map(_fmt, row)])
    return EXIT_PASS


COMMANDS = {
    "certify": cmd_certify,
    "counterexample": cmd_counterexample,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
}


def _setup_logging() -> None:
    level = os.environ.get("CONTRACTIONKIT_LOG", "quiet").lower()
    levels = {"quiet": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=levels.get(level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contractionkit",
        description="Certify and test contraction of reaction-diffusion systems and coupled networks.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=fn.__name__.replace("cmd_", ""), epilog=EPILOG,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", default=None, help="output directory (default: outputs.dir or .)")
        p.add_argument("--seed", type=int, default=None, help="override every seed in the config")
        p.add_argument("--jobs", type=int, default=1, help="parallel workers for sweeps")
    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PASS if exc.code == 0 else EXIT_ERROR
    try:
        cfg = RunConfig.load(args.config)
        if args.seed is not None:
            cfg = cfg.with_overrides(**{"sim.seed": args.seed, "counterexample.seed": args.seed,
                                        **({"sweep.seed": args.seed} if "sweep" in cfg.raw else {})})
        out = Path(args.out or cfg.raw.get("outputs", {}).get("dir", "."))
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out, max(1, args.jobs))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
    except StabilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except IntegrationError as exc:
        print(f"error: integration aborted: {exc}", file=sys.stderr)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
