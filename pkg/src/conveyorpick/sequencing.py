"""Picking-order selection: greedy rules, exhaustive search, subset DP,
and windowed local refinement.

All planners work on a snapshot of object positions taken at the
planning instant; while a plan executes, every remaining object keeps
drifting left, so the time model is consulted with positions advected by
the elapsed plan time. The exhaustive and DP planners run on compiled
kernels and therefore require a model with a kernel form (telescoping
arm or precomputed table).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels
from .core import ConveyorObject, PickPlan, Point2, Workspace, position_at
from .robot import get_pnp_time, lower_model

#: exhaustive search guard: factorial growth beyond this is pointless
OPT_SEQ_MAX_OBJECTS = 10
#: subset-DP guard: 2^n table entries
OPT_SEQ_DP_MAX_OBJECTS = 24


class GreedyPolicy(Enum):
    FIFO = "fifo"
    SPT = "spt"
    EUCLIDEAN = "euclidean"


@dataclass(frozen=True)
class PlanningSnapshot:
    """Objects at their planning-time positions plus the timing context."""

    objects: tuple[tuple[int, Point2], ...]
    model: object
    workspace: Workspace

    def __post_init__(self) -> None:
        ids = [oid for oid, _ in self.objects]
        if len(set(ids)) != len(ids):
            raise ValueError("snapshot object ids must be unique")

    @classmethod
    def at_time(
        cls,
        objects: list[ConveyorObject] | tuple[ConveyorObject, ...],
        t: float,
        model,
        workspace: Workspace,
    ) -> "PlanningSnapshot":
        return cls(
            tuple((o.id, position_at(o, t)) for o in objects),
            model,
            workspace,
        )

    def __len__(self) -> int:
        return len(self.objects)

    @property
    def ids(self) -> tuple[int, ...]:
        return tuple(oid for oid, _ in self.objects)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        xs = np.array([p.x for _, p in self.objects], dtype=float)
        ys = np.array([p.y for _, p in self.objects], dtype=float)
        return xs, ys


@dataclass
class PlanStats:
    """Work counters reported by the planners."""

    pnp_calls: int = 0
    permutations: int = 0


def evaluate_sequence(snap: PlanningSnapshot, order) -> PickPlan:
    """Execute *order* against the snapshot and time every pick.

    Each object is advected by the time already spent before its pick. A
    miss makes the plan infeasible: the total becomes +inf and no further
    picks are attempted.
    """
    by_id = dict(snap.objects)
    seen = set()
    for oid in order:
        if oid not in by_id:
            raise ValueError(f"unknown object id {oid} in order")
        if oid in seen:
            raise ValueError(f"duplicate object id {oid} in order")
        seen.add(oid)
    t = 0.0
    times: list[float] = []
    for idx, oid in enumerate(order):
        pos = by_id[oid]
        out = get_pnp_time(snap.model, Point2(pos.x - t, pos.y), snap.workspace)
        if out.is_miss:
            return PickPlan(tuple(order), tuple(times), math.inf, feasible=False)
        t += out.total_time
        times.append(t)
    return PickPlan(tuple(order), tuple(times), t, feasible=True)


def greedy_select(snap: PlanningSnapshot, policy: GreedyPolicy) -> int:
    """Id of the object the greedy rule picks next; ties go to the lowest id."""
    if not snap.objects:
        raise ValueError("cannot select from an empty snapshot")
    if policy is GreedyPolicy.FIFO:
        return min(snap.objects, key=lambda item: (item[1].x, item[0]))[0]
    if policy is GreedyPolicy.EUCLIDEAN:
        return min(snap.objects, key=lambda item: (item[1].norm(), item[0]))[0]
    best_id = None
    best_t = math.inf
    for oid, pos in sorted(snap.objects, key=lambda item: item[0]):
        out = get_pnp_time(snap.model, pos, snap.workspace)
        if out.is_hit and out.total_time < best_t:
            best_t = out.total_time
            best_id = oid
    if best_id is None:
        raise ValueError("no feasible pick: every object misses")
    return best_id


def _kernel_args(snap: PlanningSnapshot) -> tuple:
    k = lower_model(snap.model)
    return (*k.args, snap.workspace.x_left, snap.workspace.x_right)


def _plan_from_order(snap: PlanningSnapshot, order: np.ndarray, kargs: tuple) -> PickPlan:
    xs, ys = snap.arrays()
    times, done, total = _kernels._eval_order(xs, ys, order, *kargs)
    ids = snap.ids
    if done == len(order) and len(order) == len(snap):
        return PickPlan(
            tuple(ids[i] for i in order),
            tuple(float(t) for t in times[: len(order)]),
            float(total),
            feasible=True,
        )
    prefix = order[:done]
    return PickPlan(
        tuple(ids[i] for i in prefix),
        tuple(float(t) for t in times[:done]),
        math.inf,
        feasible=False,
    )


def opt_seq(snap: PlanningSnapshot, return_stats: bool = False):
    """Optimal plan by exhaustive enumeration of all picking orders.

    Ties break toward the lexicographically smallest order over snapshot
    indices. If no order picks everything, the returned plan covers the
    best executable prefix (most picks, then earliest completion) and is
    marked infeasible. Guarded to n <= 10.
    """
    n = len(snap)
    if n > OPT_SEQ_MAX_OBJECTS:
        raise ValueError(
            f"opt_seq enumerates n! orders and is limited to n <= {OPT_SEQ_MAX_OBJECTS}; "
            f"got n = {n}. Use opt_seq_dp instead."
        )
    if n == 0:
        plan = PickPlan()
        return (plan, PlanStats()) if return_stats else plan
    kargs = _kernel_args(snap)
    xs, ys = snap.arrays()
    best, done, total, perms, calls = _kernels._optseq(xs, ys, *kargs)
    plan = _plan_from_order(snap, best[:done] if done < n else best, kargs)
    if return_stats:
        return plan, PlanStats(pnp_calls=int(calls), permutations=int(perms))
    return plan


def opt_seq_dp(snap: PlanningSnapshot, return_stats: bool = False):
    """Optimal plan by dynamic programming over object subsets.

    For every subset U, the best completion time is found by minimizing
    over the object picked last: T[U] = min_i T[U \\ {i}] + pnp time of i
    advected by T[U \\ {i}]. The order is recovered by backtracing the
    stored argmin pointers, so memory stays at one entry per subset.
    Matches opt_seq's total exactly; guarded to n <= 24.
    """
    n = len(snap)
    if n > OPT_SEQ_DP_MAX_OBJECTS:
        raise ValueError(
            f"opt_seq_dp stores 2^n entries and is limited to n <= {OPT_SEQ_DP_MAX_OBJECTS}; "
            f"got n = {n}. Use sub_opt_dp instead."
        )
    if n == 0:
        plan = PickPlan()
        return (plan, PlanStats()) if return_stats else plan
    kargs = _kernel_args(snap)
    xs, ys = snap.arrays()
    T, last, best_mask, calls = _kernels._optseqdp(xs, ys, *kargs)
    order = _kernels._backtrace(last, best_mask)
    ids = snap.ids
    times = []
    mask = 0
    for i in order:
        mask |= 1 << int(i)
        times.append(float(T[mask]))
    feasible = best_mask == (1 << n) - 1
    plan = PickPlan(
        tuple(ids[int(i)] for i in order),
        tuple(times),
        times[-1] if (feasible and times) else (0.0 if feasible else math.inf),
        feasible=feasible,
    )
    if return_stats:
        return plan, PlanStats(pnp_calls=int(calls))
    return plan


def initial_order(snap: PlanningSnapshot, policy: GreedyPolicy) -> list[int]:
    """Full starting order for the refinement planner, as snapshot indices.

    FIFO sorts by x (belt entry order), EUCLIDEAN by distance to the
    drop-off, SPT by each object's current single-pick time; ids break
    ties. Objects unpickable right now sort last under SPT.
    """
    items = list(enumerate(snap.objects))
    if policy is GreedyPolicy.FIFO:
        items.sort(key=lambda it: (it[1][1].x, it[1][0]))
    elif policy is GreedyPolicy.EUCLIDEAN:
        items.sort(key=lambda it: (it[1][1].norm(), it[1][0]))
    else:
        totals = [
            get_pnp_time(snap.model, pos, snap.workspace).total_time
            for _, (_, pos) in items
        ]
        items = [it for _, it in sorted(zip(totals, items), key=lambda z: (z[0], z[1][1][0]))]
    return [idx for idx, _ in items]


def sub_opt_dp(
    snap: PlanningSnapshot,
    m1: int | None = None,
    m2: int = 9,
    init: GreedyPolicy = GreedyPolicy.FIFO,
    return_stats: bool = False,
):
    """Near-optimal plan by windowed re-optimization of a greedy order.

    Starting from the init-policy ordering, performs m1 sweeps; each
    sweep slides a window of m2 consecutive positions along the
    sequence, re-solves the window with the subset DP on positions
    advected by the elapsed time, and splices the result back only when
    the full plan strictly improves. m1 defaults to n. When n <= m2 a
    single window covers everything and the result equals opt_seq_dp.
    """
    n = len(snap)
    if m2 < 2:
        raise ValueError(f"window size m2 must be at least 2, got {m2}")
    if m2 > OPT_SEQ_DP_MAX_OBJECTS:
        raise ValueError(f"window size m2 must stay within the DP guard, got {m2}")
    if m1 is None:
        m1 = n
    if m1 < 0:
        raise ValueError(f"sweep count m1 must be non-negative, got {m1}")
    if n == 0:
        plan = PickPlan()
        return (plan, PlanStats()) if return_stats else plan
    if n <= m2:
        return opt_seq_dp(snap, return_stats=return_stats)
    kargs = _kernel_args(snap)
    xs, ys = snap.arrays()
    order0 = np.array(initial_order(snap, init), dtype=np.int64)
    order, calls = _kernels._suboptdp(xs, ys, order0, m1, m2, *kargs)
    plan = _plan_from_order(snap, order, kargs)
    if return_stats:
        return plan, PlanStats(pnp_calls=int(calls))
    return plan
