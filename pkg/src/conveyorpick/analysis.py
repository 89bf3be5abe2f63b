"""Two-object order analysis and the optimal-picking-order study.

Quantifies when greedy ordering goes wrong: the sign of the completion
difference between the two picking orders of an object pair flips as
the pair slides along the belt, so no fixed per-pick rule is optimal.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import Point2, Workspace
from .robot import TelescopingArm, two_object_times
from .sequencing import PlanningSnapshot, opt_seq_dp


@dataclass(frozen=True)
class DeltaTSample:
    """One evaluation of the order-difference function."""

    x: float
    delta_t: float
    t12: float
    t21: float


@dataclass(frozen=True)
class OrderDistributionRecord:
    """Rank of one object inside one instance's optimal plan (0 = first)."""

    instance_id: int
    object_id: int
    initial_pos: Point2
    pick_rank: int


def delta_t(x1: float, x2: float, y1: float, y2: float, v_e: float) -> float:
    """Completion difference t12 - t21 between the two picking orders."""
    t12, t21 = two_object_times(x1, x2, y1, y2, v_e)
    return t12 - t21


def find_root(
    y1: float,
    y2: float,
    v_e: float,
    x_lo: float,
    x_hi: float,
    tol: float = 1e-9,
) -> float:
    """Bisection root of f(x) = delta_t(x, x, y1, y2, v_e) on [x_lo, x_hi].

    Requires a sign change across the bracket; the returned abscissa is
    where the preferred picking order flips.
    """

    def f(x: float) -> float:
        return delta_t(x, x, y1, y2, v_e)

    f_lo = f(x_lo)
    f_hi = f(x_hi)
    if f_lo == 0.0:
        return x_lo
    if f_hi == 0.0:
        return x_hi
    if (f_lo > 0.0) == (f_hi > 0.0):
        raise ValueError(
            f"no sign change on [{x_lo}, {x_hi}]: f({x_lo})={f_lo:.3g}, f({x_hi})={f_hi:.3g}"
        )
    lo, hi = x_lo, x_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0.0) == (f_lo > 0.0):
            lo, f_lo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def sweep_fx(
    y1: float, y2: float, v_e: float, x_lo: float, x_hi: float, steps: int
) -> list[DeltaTSample]:
    """Uniform sampling of f(x) over [x_lo, x_hi], endpoints included."""
    if steps < 2:
        raise ValueError(f"need at least 2 sample points, got {steps}")
    samples = []
    for x in np.linspace(x_lo, x_hi, steps):
        t12, t21 = two_object_times(float(x), float(x), y1, y2, v_e)
        samples.append(DeltaTSample(float(x), t12 - t21, t12, t21))
    return samples


def order_distribution_study(
    num_instances: int,
    n: int,
    spawn_box: tuple[float, float, float, float],
    v_e: float,
    seed: int,
) -> list[OrderDistributionRecord]:
    """Optimal pick ranks of uniformly spawned objects, over many instances.

    ``spawn_box`` is (x_min, x_max, y_min, y_max). Each instance draws n
    objects uniformly in the box, solves it optimally with the subset DP
    under a telescoping arm based at the origin, and records every
    object's rank in the optimal order. Instance RNG streams derive from
    (seed, instance_id), so results are reproducible and instances are
    independent.
    """
    x_min, x_max, y_min, y_max = spawn_box
    if num_instances < 1 or n < 1:
        raise ValueError("need at least one instance and one object")
    if not (x_min < x_max and y_min < y_max and y_min >= 0.0):
        raise ValueError(f"bad spawn box {spawn_box}")
    # generous bounds: the study has no belt exit, matching the analysis setting
    workspace = Workspace(x_left=-1e9, x_right=1e9, y_top=max(y_max, 1e-6))
    arm = TelescopingArm(v_e=v_e)
    records: list[OrderDistributionRecord] = []
    for inst in range(num_instances):
        rng = np.random.default_rng([seed, inst])
        xs = rng.uniform(x_min, x_max, n)
        ys = rng.uniform(y_min, y_max, n)
        snap = PlanningSnapshot(
            tuple((i, Point2(float(xs[i]), float(ys[i]))) for i in range(n)),
            arm,
            workspace,
        )
        plan = opt_seq_dp(snap)
        if not plan.feasible:
            raise RuntimeError(f"instance {inst} unexpectedly has unpickable objects")
        for rank, oid in enumerate(plan.order):
            records.append(
                OrderDistributionRecord(
                    instance_id=inst,
                    object_id=oid,
                    initial_pos=Point2(float(xs[oid]), float(ys[oid])),
                    pick_rank=rank,
                )
            )
    return records


def write_delta_samples_csv(samples: list[DeltaTSample], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "delta_t", "t12", "t21"])
        for s in samples:
            writer.writerow([repr(s.x), repr(s.delta_t), repr(s.t12), repr(s.t21)])


def write_order_records_csv(records: list[OrderDistributionRecord], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["instance_id", "object_id", "x", "y", "pick_rank"])
        for r in records:
            writer.writerow(
                [r.instance_id, r.object_id, repr(r.initial_pos.x), repr(r.initial_pos.y), r.pick_rank]
            )


def rank_position_summary(records: list[OrderDistributionRecord]) -> dict[int, float]:
    """Mean initial x per pick rank; lower ranks should sit further left."""
    sums: dict[int, float] = {}
    counts: dict[int, int] = {}
    for r in records:
        sums[r.pick_rank] = sums.get(r.pick_rank, 0.0) + r.initial_pos.x
        counts[r.pick_rank] = counts.get(r.pick_rank, 0) + 1
    return {rank: sums[rank] / counts[rank] for rank in sorted(sums)}
