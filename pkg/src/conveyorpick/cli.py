"""Command-line front end.

Subcommands: ``table build``, ``analyze fx-sweep|root|order-distribution``,
``oneshot run``, ``continuous run``, and ``bench``. Experiment commands
consume a YAML config describing a base scenario plus parameter sweeps
and emit one CSV row per (cell, replicate). Replicate seeds are
``seed_base + replicate``, shared across cells so policies face
identical object streams.
"""

from __future__ import annotations

import csv
import hashlib
import itertools
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import click
import numpy as np
import yaml

from . import analysis
from .core import Point2, Workspace
from .robot import (
    PnpTimeTable,
    ScaraArm,
    TelescopingArm,
    build_pnp_table,
    load_table,
    save_table,
)
from .sequencing import PlanningSnapshot, opt_seq, opt_seq_dp, sub_opt_dp
from .sim import (
    OneShotBox,
    PoissonArrivals,
    Policy,
    ScenarioConfig,
    SimMetrics,
    UniformSquare,
    run_continuous,
    run_one_shot,
)

DEFAULT_WORKSPACE = {"x_left": -5.0, "x_right": 5.0, "y_top": 5.0}


def workspace_from_dict(d: dict | None) -> Workspace:
    merged = {**DEFAULT_WORKSPACE, **(d or {})}
    return Workspace(
        x_left=float(merged["x_left"]),
        x_right=float(merged["x_right"]),
        y_top=float(merged["y_top"]),
    )


def robot_from_dict(d: dict | None, workspace: Workspace, table_resolution=(100, 100)):
    """Build the timing model a scenario plans against.

    kinds: ``telescoping`` (closed form), ``scara`` (joint-space arm,
    automatically wrapped in a precomputed table so the planners can use
    it), ``table`` (load a saved table file).
    """
    d = dict(d or {"kind": "telescoping"})
    kind = str(d.pop("kind", "telescoping")).lower()
    if kind == "telescoping":
        v_e = float(d.pop("v_e", 2.0))
        base_x = float(d.pop("base_x", 0.0))
        _reject_extra(d, "telescoping")
        return TelescopingArm(v_e=v_e, base=Point2(base_x, 0.0))
    if kind == "scara":
        v_max = float(d.pop("v_max", 4.0))
        a_max = float(d.pop("a_max", 40.0))
        resolution = tuple(d.pop("table_resolution", table_resolution))
        _reject_extra(d, "scara")
        return _cached_scara_table(workspace, v_max, a_max, (int(resolution[0]), int(resolution[1])))
    if kind == "table":
        path = d.pop("path")
        _reject_extra(d, "table")
        return load_table(path)
    raise ValueError(f"unknown robot kind {kind!r}")


def _reject_extra(d: dict, kind: str) -> None:
    if d:
        raise ValueError(f"unknown {kind} robot options: {sorted(d)}")


_SCARA_TABLE_CACHE: dict[tuple, PnpTimeTable] = {}


def _cached_scara_table(workspace: Workspace, v_max: float, a_max: float, resolution) -> PnpTimeTable:
    key = (workspace.x_left, workspace.x_right, workspace.y_top, v_max, a_max, resolution)
    if key not in _SCARA_TABLE_CACHE:
        arm = ScaraArm.default_for_workspace(workspace, v_max=v_max, a_max=a_max)
        _SCARA_TABLE_CACHE[key] = build_pnp_table(arm, workspace, resolution)
    return _SCARA_TABLE_CACHE[key]


def robot_from_flag(spec: str, workspace: Workspace):
    """Parse a ``--robot`` flag value: telescoping | scara | table:<file>."""
    if spec.startswith("table:"):
        return robot_from_dict({"kind": "table", "path": spec[len("table:"):]}, workspace)
    return robot_from_dict({"kind": spec}, workspace)


@dataclass(frozen=True)
class ExperimentMatrix:
    """Base scenario crossed with per-parameter value sweeps."""

    mode: str
    base: dict
    sweeps: dict[str, list]
    repetitions: int
    seed_base: int

    def __post_init__(self) -> None:
        if self.mode not in ("oneshot", "continuous"):
            raise ValueError(f"mode must be 'oneshot' or 'continuous', got {self.mode!r}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        for name, values in self.sweeps.items():
            if not isinstance(values, list) or not values:
                raise ValueError(f"sweep {name!r} must be a non-empty list")

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            **{k: self.base[k] for k in sorted(self.base)},
            "sweeps": {k: list(v) for k, v in sorted(self.sweeps.items())},
            "repetitions": self.repetitions,
            "seed_base": self.seed_base,
        }

    def cells(self) -> list[dict]:
        """Cross product of sweep values merged over the base config."""
        names = list(self.sweeps)
        out = []
        for combo in itertools.product(*(self.sweeps[n] for n in names)):
            cell = json.loads(json.dumps(self.base))
            for name, value in zip(names, combo):
                _assign_path(cell, name, value)
            out.append(cell)
        return out


def _assign_path(cfg: dict, dotted: str, value) -> None:
    """Assign into a nested dict along a dotted path like 'arrival.lam'."""
    parts = dotted.split(".")
    node = cfg
    for part in parts[:-1]:
        node = node.setdefault(part, {})
    node[parts[-1]] = value


_MATRIX_KEYS = {"mode", "sweeps", "repetitions", "seed_base"}


def load_matrix(path: str | Path) -> ExperimentMatrix:
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: config must be a mapping")
    mode = raw.get("mode")
    base = {k: v for k, v in raw.items() if k not in _MATRIX_KEYS}
    return ExperimentMatrix(
        mode=str(mode),
        base=base,
        sweeps={str(k): list(v) for k, v in (raw.get("sweeps") or {}).items()},
        repetitions=int(raw.get("repetitions", 1)),
        seed_base=int(raw.get("seed_base", 0)),
    )


def dump_matrix(matrix: ExperimentMatrix) -> str:
    return yaml.safe_dump(matrix.to_dict(), sort_keys=False)


def config_hash(cell: dict) -> str:
    blob = json.dumps(cell, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def scenario_from_cell(cell: dict, mode: str, seed: int) -> ScenarioConfig:
    workspace = workspace_from_dict(cell.get("workspace"))
    model = robot_from_dict(cell.get("robot"), workspace)
    pol = cell.get("policy", "suboptdp")
    sub = cell.get("suboptdp") or {}
    policy = Policy.parse(
        str(pol),
        m1=sub.get("m1"),
        m2=int(sub.get("m2", 9)),
        init=str(sub.get("init", "fifo")),
    )
    arr = dict(cell.get("arrival") or {})
    kind = str(arr.pop("kind", "one_shot" if mode == "oneshot" else "poisson")).lower()
    if kind in ("one_shot", "oneshot", "box"):
        arrival = OneShotBox(float(arr.get("x_min", 3.0)), float(arr.get("x_max", 5.0)))
    elif kind == "poisson":
        arrival = PoissonArrivals(float(arr["lam"]))
    elif kind in ("uniform_square", "uniform"):
        arrival = UniformSquare(float(arr["length_scale"]))
    else:
        raise ValueError(f"unknown arrival kind {kind!r}")
    return ScenarioConfig(
        workspace=workspace,
        model=model,
        policy=policy,
        arrival=arrival,
        n_objects=int(cell.get("n_objects", 10)),
        seed=seed,
    )


def _run_cell(task: tuple) -> dict:
    cell_index, cell, mode, replicate, seed = task
    row = {
        "cell_index": cell_index,
        "config_hash": config_hash(cell),
        "pair_hash": config_hash({k: v for k, v in cell.items() if k != "policy"}),
        "policy": str(cell.get("policy", "suboptdp")),
        "seed": seed,
        "replicate": replicate,
    }
    for name, value in _sweep_columns(cell):
        row[name] = value
    try:
        cfg = scenario_from_cell(cell, mode, seed)
        metrics = run_one_shot(cfg) if mode == "oneshot" else run_continuous(cfg)
        row.update(
            picked=metrics.picked,
            missed=metrics.missed,
            total_objects=metrics.total_objects,
            picked_ratio=repr(metrics.picked_ratio),
            total_time=repr(metrics.total_time),
            error="",
        )
    except Exception as exc:  # per-cell failures must not kill the run
        row.update(
            picked="", missed="", total_objects="", picked_ratio="", total_time="",
            error=f"{type(exc).__name__}: {exc}",
        )
    return row


def _sweep_columns(cell: dict) -> list[tuple[str, str]]:
    cols = []
    arrival = cell.get("arrival") or {}
    if "lam" in arrival:
        cols.append(("lam", repr(float(arrival["lam"]))))
    if "length_scale" in arrival:
        cols.append(("length_scale", repr(float(arrival["length_scale"]))))
    cols.append(("n_objects", str(cell.get("n_objects", 10))))
    return cols


def run_matrix(matrix: ExperimentMatrix, jobs: int = 1) -> tuple[list[dict], list[str]]:
    """All (cell, replicate) runs, row-sorted by (cell_index, replicate)."""
    cells = matrix.cells()
    tasks = [
        (ci, cell, matrix.mode, rep, matrix.seed_base + rep)
        for ci, cell in enumerate(cells)
        for rep in range(matrix.repetitions)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_cell, tasks))
    else:
        rows = [_run_cell(t) for t in tasks]
    rows.sort(key=lambda r: (r["cell_index"], r["replicate"]))
    errors = [
        f"cell {r['cell_index']} rep {r['replicate']}: {r['error']}" for r in rows if r["error"]
    ]
    return rows, errors


def write_rows_csv(rows: list[dict], path: str | Path) -> None:
    if not rows:
        raise ValueError("no rows to write")
    fields = list(rows[0])
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)


def summarize_vs_baseline(rows: list[dict], mode: str) -> list[str]:
    """Per-policy comparison against suboptdp on matched (cell-params, seed)."""
    ok = [r for r in rows if not r["error"]]
    base: dict[tuple, dict] = {}
    for r in ok:
        if r["policy"] == "suboptdp":
            base[_match_key(r)] = r
    if not base:
        return []
    agg: dict[str, list[float]] = {}
    for r in ok:
        b = base.get(_match_key(r))
        if b is None:
            continue
        if mode == "oneshot":
            denom = float(b["total_time"])
            if denom > 0 and math.isfinite(float(r["total_time"])):
                agg.setdefault(r["policy"], []).append(float(r["total_time"]) / denom)
        else:
            agg.setdefault(r["policy"], []).append(
                float(r["picked_ratio"]) - float(b["picked_ratio"])
            )
    lines = []
    label = "time ratio vs suboptdp" if mode == "oneshot" else "picked-ratio delta vs suboptdp"
    for policy in sorted(agg):
        vals = agg[policy]
        lines.append(f"{policy:>12}: mean {label} = {sum(vals) / len(vals):+.4f} ({len(vals)} runs)")
    return lines


def _match_key(row: dict) -> tuple:
    return (row["pair_hash"], row["seed"])


@click.group()
def main() -> None:
    """Time-optimal picking sequences for a conveyor-serving robot arm."""


@main.group()
def table() -> None:
    """Precomputed PnP time tables."""


@table.command("build")
@click.option("--robot", "robot_spec", default="scara", show_default=True,
              help="telescoping | scara")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@click.option("--resolution", default="100x100", show_default=True, help="ROWSxCOLS")
@click.option("--x-left", default=-5.0, show_default=True)
@click.option("--x-right", default=5.0, show_default=True)
@click.option("--y-top", default=5.0, show_default=True)
@click.option("--ve", default=2.0, show_default=True, help="telescoping end-effector speed")
@click.option("--base-x", default=0.0, show_default=True, help="telescoping base x")
@click.option("--v-max", default=4.0, show_default=True, help="scara joint speed limit")
@click.option("--a-max", default=40.0, show_default=True, help="scara joint acceleration limit")
def table_build(robot_spec, out_path, resolution, x_left, x_right, y_top, ve, base_x, v_max, a_max):
    """Sample a robot model over the workspace and save the table."""
    try:
        rows, cols = (int(v) for v in resolution.lower().split("x"))
        workspace = Workspace(x_left=x_left, x_right=x_right, y_top=y_top)
        if robot_spec == "telescoping":
            model = TelescopingArm(v_e=ve, base=Point2(base_x, 0.0))
        elif robot_spec == "scara":
            model = ScaraArm.default_for_workspace(workspace, v_max=v_max, a_max=a_max)
        else:
            raise ValueError(f"cannot build a table from robot {robot_spec!r}")
        tbl = build_pnp_table(model, workspace, (rows, cols))
    except ValueError as exc:
        raise click.UsageError(str(exc))
    save_table(tbl, out_path)
    click.echo(f"wrote {rows}x{cols} table to {out_path}")
    click.echo(f"reachable cells: {tbl.reachable_fraction():.2%}")


@main.group()
def analyze() -> None:
    """Two-object analysis and order-distribution studies."""


@analyze.command("fx-sweep")
@click.option("--y1", default=0.4, show_default=True)
@click.option("--y2", default=0.7, show_default=True)
@click.option("--ve", default=2.0, show_default=True)
@click.option("--lo", default=0.4, show_default=True)
@click.option("--hi", default=1.4, show_default=True)
@click.option("--steps", default=101, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
def analyze_fx_sweep(y1, y2, ve, lo, hi, steps, out_path):
    """Sample the order-difference function f(x) over [lo, hi]."""
    samples = analysis.sweep_fx(y1, y2, ve, lo, hi, steps)
    analysis.write_delta_samples_csv(samples, out_path)
    click.echo(f"wrote {len(samples)} samples to {out_path}")


@analyze.command("root")
@click.option("--y1", default=0.4, show_default=True)
@click.option("--y2", default=0.7, show_default=True)
@click.option("--ve", default=2.0, show_default=True)
@click.option("--lo", default=0.4, show_default=True)
@click.option("--hi", default=1.4, show_default=True)
def analyze_root(y1, y2, ve, lo, hi):
    """Bisect the crossover x0 where the preferred picking order flips."""
    try:
        x0 = analysis.find_root(y1, y2, ve, lo, hi)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    click.echo(f"x0 = {x0:.6f}")


@analyze.command("order-distribution")
@click.option("--instances", default=100, show_default=True)
@click.option("--n", default=10, show_default=True)
@click.option("--x-min", default=2.0, show_default=True)
@click.option("--x-max", default=8.0, show_default=True)
@click.option("--y-min", default=0.0, show_default=True)
@click.option("--y-max", default=3.0, show_default=True)
@click.option("--ve", default=5.0, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
def analyze_order_distribution(instances, n, x_min, x_max, y_min, y_max, ve, seed, out_path):
    """Optimal pick ranks for uniformly spawned instances."""
    records = analysis.order_distribution_study(
        instances, n, (x_min, x_max, y_min, y_max), ve, seed
    )
    analysis.write_order_records_csv(records, out_path)
    means = analysis.rank_position_summary(records)
    click.echo(f"wrote {len(records)} records to {out_path}")
    click.echo(
        "mean initial x: first-picked "
        f"{means[0]:.3f}, last-picked {means[max(means)]:.3f}"
    )


def _matrix_command(mode: str, config_path, out_path, jobs, seed):
    matrix = load_matrix(config_path)
    if matrix.mode != mode:
        raise click.UsageError(f"config mode is {matrix.mode!r}, expected {mode!r}")
    if seed is not None:
        matrix = ExperimentMatrix(
            matrix.mode, matrix.base, matrix.sweeps, matrix.repetitions, seed
        )
    rows, errors = run_matrix(matrix, jobs=jobs)
    write_rows_csv(rows, out_path)
    click.echo(f"wrote {len(rows)} rows to {out_path}")
    for line in summarize_vs_baseline(rows, mode):
        click.echo(line)
    if errors:
        for line in errors:
            click.echo(line, err=True)
        sys.exit(1)


@main.group()
def oneshot() -> None:
    """One-shot batch experiments."""


@oneshot.command("run")
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@click.option("--jobs", default=1, show_default=True)
@click.option("--seed", default=None, type=int, help="override the config's seed_base")
def oneshot_run(config_path, out_path, jobs, seed):
    """Run a one-shot experiment matrix and write metrics CSV."""
    _matrix_command("oneshot", config_path, out_path, jobs, seed)


@main.group()
def continuous() -> None:
    """Continuous arrival-stream experiments."""


@continuous.command("run")
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@click.option("--jobs", default=1, show_default=True)
@click.option("--seed", default=None, type=int, help="override the config's seed_base")
def continuous_run(config_path, out_path, jobs, seed):
    """Run a continuous experiment matrix and write metrics CSV."""
    _matrix_command("continuous", config_path, out_path, jobs, seed)


@main.command()
@click.option("--algorithms", default="optseq,optseqdp,suboptdp", show_default=True)
@click.option("--n-values", default="5,10,15", show_default=True)
@click.option("--reps", default=5, show_default=True)
@click.option("--ve", default=2.0, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
def bench(algorithms, n_values, reps, ve, seed, out_path):
    """Wall-clock planning time per (algorithm, n); warmup excluded."""
    algs = [a.strip() for a in algorithms.split(",") if a.strip()]
    ns = [int(v) for v in n_values.split(",")]
    planners = {
        "optseq": opt_seq,
        "optseqdp": opt_seq_dp,
        "suboptdp": sub_opt_dp,
    }
    for a in algs:
        if a not in planners:
            raise click.UsageError(f"unknown algorithm {a!r}")
    # exit-free bench workspace: feasibility never distorts the timing
    workspace = Workspace(x_left=-1e9, x_right=1e9, y_top=5.0)
    model = TelescopingArm(v_e=ve)
    rows = []
    for alg in algs:
        planner = planners[alg]
        for n in ns:
            rng = np.random.default_rng([seed, n])
            xs = rng.uniform(3.0, 5.0, n)
            ys = rng.uniform(0.0, 5.0, n)
            snap = PlanningSnapshot(
                tuple((i, Point2(float(xs[i]), float(ys[i]))) for i in range(n)),
                model,
                workspace,
            )
            try:
                planner(snap)  # warmup, excluded from timing
            except ValueError as exc:
                rows.append({"algorithm": alg, "n": n, "reps": 0,
                             "mean_seconds": "", "min_seconds": "", "error": str(exc)})
                continue
            times = []
            for _ in range(reps):
                t0 = time.perf_counter()
                planner(snap)
                times.append(time.perf_counter() - t0)
            rows.append({
                "algorithm": alg,
                "n": n,
                "reps": reps,
                "mean_seconds": repr(sum(times) / len(times)),
                "min_seconds": repr(min(times)),
                "error": "",
            })
            click.echo(f"{alg} n={n}: mean {sum(times) / len(times):.6f}s over {reps} reps")
    write_rows_csv(rows, out_path)
    click.echo(f"wrote {len(rows)} rows to {out_path}")


if __name__ == "__main__":
    main()
