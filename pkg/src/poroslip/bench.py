"""Run the benchmark grid and write summary tables, controls and logs.

    poroslip-bench --config grid.json --profile ci --out results --jobs 4

The JSON config may set any key of :data:`DEFAULT_CONFIG`; omitted keys keep
their defaults, which reproduce the full tissue-perfusion grid
(2 inputs x 2 delta x 3 lambda x 6 initial controls x 2 modes).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .control import (ControlGrid, LevelSet, TimeGrid, jump_tv, read_control_csv,
                      write_control_csv)
from .homotopy import HomotopyConfig, run_homotopy
from .mollifier import MollifierConfig
from .objective import ObjectiveConfig, ReducedObjective, TrackingTargets
from .pde import BoundaryFlux, DistributedSource, PdeParams
from .slip import SlipConfig, run_slip

logger = logging.getLogger(__name__)

PROFILES = {"ci": 128, "full": 512}
INPUT_ORDER = ("psi", "S")
MODE_ORDER = ("unreg", "homotopy")
COLUMNS = ("input", "delta", "lambda", "init", "mode", "final_obj", "final_instat",
           "outer_iters", "wall_time", "status")

DEFAULT_CONFIG = {
    "inputs": ["psi", "S"],
    "deltas": [0.0, 1.0],
    "lambdas": [0.0, 1e-4, 1e-2],
    "inits": [1, 2, 3, 4, 5, 6],          # 1-based positions in ``levels``
    "modes": ["unreg", "homotopy"],
    "levels": [-7, -5, -3, -1, 0, 2],
    "alpha": 5e-5,
    "horizon": 0.5,
    "length": 2.0,
    "n_time": None,                       # None: taken from the profile
    "n_space": None,
    "chi": 1.0,
    "pde": {"lambda_e": 1.0, "mu_e": 1.0, "lambda_v": 0.0774, "mu_v": 0.25, "k": 1.0},
    "slip": {"delta0_fraction": 0.25, "sigma": 1e-3, "max_outer": 10000},
    "homotopy": {"schedule": [1.6e-2, 8e-3, 4e-3, 2e-3, 1e-3, 5e-4, 2.5e-4, 0.0], "a": None},
    "mollifier_method": "exact",
    "backend": "sweep",
    "seed": 0,
}


@dataclass(frozen=True)
class ExperimentSpec:
    input: str
    delta: float
    lam: float
    init: int
    mode: str
    config: dict = field(repr=False, compare=False, hash=False)

    @property
    def tag(self) -> str:
        return f"{self.input}_d{self.delta:g}_lam{self.lam:g}_init{self.init}_{self.mode}"

    def sort_key(self):
        return (INPUT_ORDER.index(self.input), self.delta, self.init, self.lam,
                MODE_ORDER.index(self.mode))


def load_config(path=None, profile: str = "ci") -> dict:
    cfg = json.loads(json.dumps(DEFAULT_CONFIG))
    if path is not None:
        user = json.loads(Path(path).read_text())
        unknown = set(user) - set(cfg)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        for key, val in user.items():
            if isinstance(cfg[key], dict) and isinstance(val, dict):
                cfg[key].update(val)
            else:
                cfg[key] = val
    n = PROFILES[profile]
    cfg["n_time"] = cfg["n_time"] or n
    cfg["n_space"] = cfg["n_space"] or n
    for inp in cfg["inputs"]:
        if inp not in INPUT_ORDER:
            raise ValueError(f"unknown input {inp!r}")
    for mode in cfg["modes"]:
        if mode not in MODE_ORDER:
            raise ValueError(f"unknown mode {mode!r}")
    for ini in cfg["inits"]:
        if not 1 <= ini <= len(cfg["levels"]):
            raise ValueError(f"init {ini} is not a position in levels")
    return cfg


def expand_grid(cfg: dict) -> list:
    specs = [ExperimentSpec(i, float(d), float(l), int(n), m, cfg)
             for i in cfg["inputs"] for d in cfg["deltas"] for l in cfg["lambdas"]
             for n in cfg["inits"] for m in cfg["modes"]]
    return sorted(specs, key=ExperimentSpec.sort_key)


def build_problem(spec: ExperimentSpec):
    """Objective config, slip config, homotopy config and initial control of a row."""
    cfg = spec.config
    grid = TimeGrid(cfg["horizon"], cfg["n_time"])
    prm = PdeParams(L=cfg["length"], M=cfg["n_space"], delta=spec.delta, **cfg["pde"])
    levels = LevelSet(tuple(cfg["levels"]))
    if spec.input == "psi":
        kind = BoundaryFlux()
    else:
        kind = DistributedSource.constant(prm, cfg["chi"])
    obj = ObjectiveConfig(grid, alpha=cfg["alpha"], lam=spec.lam,
                          mollifier=MollifierConfig(0.0, method=cfg["mollifier_method"]),
                          targets=TrackingTargets.paper(grid, prm), pde=prm, input=kind,
                          backend=cfg["backend"])
    sc = cfg["slip"]
    scfg = SlipConfig(delta0=sc["delta0_fraction"] * grid.horizon, sigma=sc["sigma"],
                      max_outer=sc["max_outer"])
    hcfg = HomotopyConfig(schedule=tuple(cfg["homotopy"]["schedule"]), a=cfg["homotopy"]["a"])
    w0 = ControlGrid.constant(grid, levels, levels.levels[spec.init - 1])
    return obj, scfg, hcfg, w0


def run_experiment(spec: ExperimentSpec, out: Path) -> dict:
    """Run one row; writes its control CSV and log. Never raises."""
    row = {"input": spec.input, "delta": spec.delta, "lambda": spec.lam, "init": spec.init,
           "mode": spec.mode, "final_obj": math.nan, "final_instat": math.nan,
           "outer_iters": 0, "wall_time": 0.0, "status": "ok", "tag": spec.tag}
    t0 = time.perf_counter()
    log_path = out / "logs" / f"{spec.tag}.log"
    try:
        with log_path.open("w") as fh:
            def log(line):
                fh.write(line + "\n")
            obj, scfg, hcfg, w0 = build_problem(spec)
            if spec.mode == "unreg":
                rep = run_slip(scfg, obj, w0, log=log, tag=spec.tag)
                final, iters = rep.final, rep.outer_iterations
            else:
                rep = run_homotopy(hcfg, scfg, obj, w0, log=log, tag=spec.tag)
                final, iters = rep.final, rep.cumulative_iterations
            row.update(final_obj=float(rep.final_objective),
                       final_instat=float(rep.final_instationarity), outer_iters=int(iters))
            write_control_csv(final, out / "controls" / f"{spec.tag}.csv")
    except Exception as exc:                       # recorded per row, run continues
        row["status"] = f"failed: {type(exc).__name__}: {exc}"
        logger.error("row %s failed: %s", spec.tag, exc)
    row["wall_time"] = time.perf_counter() - t0
    return row


def _fmt(col, val):
    if col in ("final_obj", "delta", "lambda", "wall_time"):
        return f"{val:.6g}"
    if col == "final_instat":
        return f"{val:.1e}"
    return str(val)


def write_summary(rows: list, out: Path) -> None:
    with (out / "summary.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(COLUMNS)
        for r in rows:
            writer.writerow([_fmt(c, r[c]) for c in COLUMNS])
    (out / "summary.json").write_text(json.dumps(rows, indent=1, sort_keys=True) + "\n")


def run_grid(cfg: dict, out, jobs: int = 1) -> list:
    out = Path(out)
    (out / "controls").mkdir(parents=True, exist_ok=True)
    (out / "logs").mkdir(parents=True, exist_ok=True)
    specs = expand_grid(cfg)
    if jobs > 1 and len(specs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(run_experiment, specs, [out] * len(specs)))
    else:
        rows = [run_experiment(s, out) for s in specs]
    write_summary(rows, out)
    (out / "config.json").write_text(json.dumps(cfg, indent=1, sort_keys=True) + "\n")
    return rows


def recompute_objective(cfg: dict, row: dict, control_path) -> float:
    """Objective of a stored control, for auditing summary rows."""
    spec = ExperimentSpec(row["input"], row["delta"], row["lambda"], row["init"], row["mode"], cfg)
    obj, _, _, _ = build_problem(spec)
    w = read_control_csv(control_path, LevelSet(tuple(cfg["levels"])))
    w = ControlGrid(obj.grid, w.levels, w.values)
    return ReducedObjective(obj).value(w) + obj.alpha * jump_tv(w)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="poroslip-bench", description=__doc__.splitlines()[0])
    ap.add_argument("--config", type=Path, help="JSON grid config (defaults: full grid)")
    ap.add_argument("--profile", choices=sorted(PROFILES), default="ci",
                    help="grid resolution N = M (ci: 128, full: 512)")
    ap.add_argument("--out", type=Path, default=Path("bench-out"))
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--verbose", action="store_true")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args.config, args.profile)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    rows = run_grid(cfg, args.out, jobs=max(1, args.jobs))
    failed = [r for r in rows if r["status"] != "ok"]
    print(f"{len(rows)} rows, {len(failed)} failed -> {args.out / 'summary.csv'}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
