"""One-shot and continuous conveyor simulations.

The clock is event-driven: between decision instants everything is
analytic, so time jumps from one pick completion (or object arrival) to
the next. At every decision instant the robot is idle at the drop-off,
objects are advected to the current time, irrecoverable objects are
written off as missed, and the configured policy chooses the next pick.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .core import ConveyorObject, Point2, Workspace, position_at
from .robot import PnpOutcome, get_pnp_time
from .sequencing import (
    GreedyPolicy,
    PlanningSnapshot,
    greedy_select,
    opt_seq,
    opt_seq_dp,
    sub_opt_dp,
)

#: snapshot caps for the planner policies in continuous mode; the DP cap
#: keeps the subset table bounded, the exhaustive cap the factorial
OPT_SEQ_DP_HORIZON = 20
OPT_SEQ_HORIZON = 8


class PolicyKind(Enum):
    FIFO = "fifo"
    SPT = "spt"
    EUCLIDEAN = "euclidean"
    OPT_SEQ = "optseq"
    OPT_SEQ_DP = "optseqdp"
    SUB_OPT_DP = "suboptdp"


_GREEDY = {
    PolicyKind.FIFO: GreedyPolicy.FIFO,
    PolicyKind.SPT: GreedyPolicy.SPT,
    PolicyKind.EUCLIDEAN: GreedyPolicy.EUCLIDEAN,
}


@dataclass(frozen=True)
class Policy:
    """Pick-selection policy plus refinement parameters where relevant."""

    kind: PolicyKind
    m1: int | None = None
    m2: int = 9
    init: GreedyPolicy = GreedyPolicy.FIFO

    @classmethod
    def parse(cls, name: str, m1: int | None = None, m2: int = 9, init: str = "fifo") -> "Policy":
        return cls(PolicyKind(name.lower()), m1=m1, m2=m2, init=GreedyPolicy(init.lower()))

    @property
    def is_greedy(self) -> bool:
        return self.kind in _GREEDY

    @property
    def name(self) -> str:
        return self.kind.value


@dataclass(frozen=True)
class OneShotBox:
    """Batch spawn band: x uniform in [x_min, x_max], all at t = 0."""

    x_min: float = 3.0
    x_max: float = 5.0

    def __post_init__(self) -> None:
        if not self.x_min < self.x_max:
            raise ValueError(f"require x_min < x_max, got [{self.x_min}, {self.x_max}]")


@dataclass(frozen=True)
class PoissonArrivals:
    """Objects appear at the right edge on a rate-lam Poisson process."""

    lam: float

    def __post_init__(self) -> None:
        if not self.lam > 0.0:
            raise ValueError(f"arrival rate must be positive, got {self.lam}")


@dataclass(frozen=True)
class UniformSquare:
    """n points in the unit square, height-scaled to the workspace and
    length-scaled to ``length_scale`` belt units; the square's left edge
    crosses the right workspace edge at t = 0."""

    length_scale: float

    def __post_init__(self) -> None:
        if not self.length_scale > 0.0:
            raise ValueError(f"length scale must be positive, got {self.length_scale}")


ArrivalSpec = OneShotBox | PoissonArrivals | UniformSquare


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything one simulation run needs."""

    workspace: Workspace
    model: object
    policy: Policy
    arrival: ArrivalSpec
    n_objects: int
    seed: int

    def __post_init__(self) -> None:
        if self.n_objects < 1:
            raise ValueError(f"need at least one object, got {self.n_objects}")


@dataclass(frozen=True)
class PickEvent:
    object_id: int
    decision_time: float
    pick_time: float
    pick_point: Point2


@dataclass
class SimMetrics:
    picked: int
    missed: int
    total_objects: int
    total_time: float
    per_pick_log: list[PickEvent] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.picked + self.missed != self.total_objects:
            raise ValueError("picked + missed must equal the number of objects")

    @property
    def picked_ratio(self) -> float:
        return self.picked / self.total_objects


def spawn_one_shot(cfg: ScenarioConfig) -> list[ConveyorObject]:
    """Uniform batch in the spawn band at t = 0."""
    box = cfg.arrival
    if not isinstance(box, OneShotBox):
        raise TypeError("spawn_one_shot requires a OneShotBox arrival spec")
    rng = np.random.default_rng([cfg.seed, 0])
    xs = rng.uniform(box.x_min, box.x_max, cfg.n_objects)
    ys = rng.uniform(cfg.workspace.y_bottom, cfg.workspace.y_top, cfg.n_objects)
    return [
        ConveyorObject(i, Point2(float(xs[i]), float(ys[i])), 0.0)
        for i in range(cfg.n_objects)
    ]


def spawn_poisson(cfg: ScenarioConfig) -> list[ConveyorObject]:
    """Poisson arrival stream at the right workspace edge.

    The first event fires at t = 0; subsequent gaps are exponential with
    rate lam. Each event places an object at (x_right, y) with y uniform
    over the workspace height.
    """
    spec = cfg.arrival
    if not isinstance(spec, PoissonArrivals):
        raise TypeError("spawn_poisson requires a PoissonArrivals spec")
    rng = np.random.default_rng([cfg.seed, 0])
    objs = []
    t = 0.0
    for i in range(cfg.n_objects):
        if i > 0:
            t += rng.exponential(1.0 / spec.lam)
        y = rng.uniform(cfg.workspace.y_bottom, cfg.workspace.y_top)
        objs.append(ConveyorObject(i, Point2(cfg.workspace.x_right, float(y)), float(t)))
    return objs


def spawn_uniform_square(cfg: ScenarioConfig) -> list[ConveyorObject]:
    """Unit-square sample stretched over ``length_scale`` belt units.

    A point (u, v) reaches the right workspace edge at time
    u * length_scale with y = v * y_top, i.e. the scaled square trails
    rightward from the edge at t = 0 and advects left at belt speed.
    """
    spec = cfg.arrival
    if not isinstance(spec, UniformSquare):
        raise TypeError("spawn_uniform_square requires a UniformSquare spec")
    rng = np.random.default_rng([cfg.seed, 0])
    us = rng.uniform(0.0, 1.0, cfg.n_objects)
    vs = rng.uniform(0.0, 1.0, cfg.n_objects)
    return [
        ConveyorObject(
            i,
            Point2(cfg.workspace.x_right, float(vs[i]) * cfg.workspace.y_top),
            float(us[i]) * spec.length_scale,
        )
        for i in range(cfg.n_objects)
    ]


def spawn_objects(cfg: ScenarioConfig) -> list[ConveyorObject]:
    if isinstance(cfg.arrival, OneShotBox):
        return spawn_one_shot(cfg)
    if isinstance(cfg.arrival, PoissonArrivals):
        return spawn_poisson(cfg)
    return spawn_uniform_square(cfg)


def _plan_snapshot(snap: PlanningSnapshot, policy: Policy):
    if policy.kind is PolicyKind.OPT_SEQ:
        return opt_seq(snap)
    if policy.kind is PolicyKind.OPT_SEQ_DP:
        return opt_seq_dp(snap)
    return sub_opt_dp(snap, m1=policy.m1, m2=policy.m2, init=policy.init)


def _capped_snapshot(
    pairs: list[tuple[int, Point2]], policy: Policy, model, workspace: Workspace
) -> PlanningSnapshot:
    """Planner input, capped to the leftmost objects where the planner
    has a hard size guard."""
    cap = None
    if policy.kind is PolicyKind.OPT_SEQ_DP:
        cap = OPT_SEQ_DP_HORIZON
    elif policy.kind is PolicyKind.OPT_SEQ:
        cap = OPT_SEQ_HORIZON
    if cap is not None and len(pairs) > cap:
        pairs = sorted(pairs, key=lambda item: (item[1].x, item[0]))[:cap]
    return PlanningSnapshot(tuple(pairs), model, workspace)


def run_one_shot(cfg: ScenarioConfig) -> SimMetrics:
    """Pick a single pre-spawned batch; objects that become unreachable
    before their turn count as missed."""
    objects = spawn_objects(cfg)
    if not isinstance(cfg.arrival, OneShotBox):
        raise TypeError("run_one_shot requires a OneShotBox arrival spec")
    if cfg.policy.is_greedy:
        return _run_greedy_batch(cfg, objects)

    snap = PlanningSnapshot.at_time(objects, 0.0, cfg.model, cfg.workspace)
    plan = _plan_snapshot(snap, cfg.policy)
    by_id = {o.id: o for o in objects}
    events = []
    t_prev = 0.0
    for oid, t_done in zip(plan.order, plan.pick_times):
        pos = position_at(by_id[oid], t_prev)
        out = get_pnp_time(cfg.model, pos, cfg.workspace)
        events.append(PickEvent(oid, t_prev, t_done, out.pick_point))
        t_prev = t_done
    picked = len(plan.order)
    return SimMetrics(
        picked=picked,
        missed=cfg.n_objects - picked,
        total_objects=cfg.n_objects,
        total_time=events[-1].pick_time if events else 0.0,
        per_pick_log=events,
    )


def _run_greedy_batch(cfg: ScenarioConfig, objects: list[ConveyorObject]) -> SimMetrics:
    rule = _GREEDY[cfg.policy.kind]
    remaining = {o.id: o for o in objects}
    now = 0.0
    picked = 0
    missed = 0
    events: list[PickEvent] = []
    while remaining:
        outcomes: dict[int, PnpOutcome] = {}
        for oid, obj in remaining.items():
            outcomes[oid] = get_pnp_time(cfg.model, position_at(obj, now), cfg.workspace)
        lost = [oid for oid, out in outcomes.items() if out.is_miss]
        for oid in lost:
            del remaining[oid]
            missed += 1
        if not remaining:
            break
        snap = PlanningSnapshot.at_time(
            list(remaining.values()), now, cfg.model, cfg.workspace
        )
        chosen = greedy_select(snap, rule)
        out = outcomes[chosen]
        now += out.total_time
        events.append(PickEvent(chosen, now - out.total_time, now, out.pick_point))
        del remaining[chosen]
        picked += 1
    return SimMetrics(
        picked=picked,
        missed=missed,
        total_objects=cfg.n_objects,
        total_time=events[-1].pick_time if events else 0.0,
        per_pick_log=events,
    )


def run_continuous(cfg: ScenarioConfig) -> SimMetrics:
    """Serve an arrival stream until every object is picked or missed.

    Decision instants are pick completions plus, when the belt is empty,
    the next spawn. An object is written off as missed at the first
    decision instant at which even an immediate attempt cannot intercept
    it; planners then never see unpickable objects. Sequence policies
    replan from scratch after every pick and execute only the first
    planned pick.
    """
    if isinstance(cfg.arrival, OneShotBox):
        raise TypeError("run_continuous requires a Poisson or uniform-square arrival spec")
    objects = spawn_objects(cfg)
    pending = sorted(objects, key=lambda o: (o.spawn_time, o.id))
    on_belt: dict[int, ConveyorObject] = {}
    next_idx = 0
    now = 0.0
    picked = 0
    missed = 0
    events: list[PickEvent] = []
    n = len(objects)
    while picked + missed < n:
        while next_idx < len(pending) and pending[next_idx].spawn_time <= now:
            obj = pending[next_idx]
            on_belt[obj.id] = obj
            next_idx += 1
        outcomes: dict[int, PnpOutcome] = {}
        for oid, obj in on_belt.items():
            outcomes[oid] = get_pnp_time(cfg.model, position_at(obj, now), cfg.workspace)
        lost = [oid for oid, out in outcomes.items() if out.is_miss]
        for oid in lost:
            del on_belt[oid]
            missed += 1
        if not on_belt:
            if next_idx >= len(pending):
                break
            now = pending[next_idx].spawn_time
            continue
        if cfg.policy.is_greedy:
            snap = PlanningSnapshot.at_time(
                list(on_belt.values()), now, cfg.model, cfg.workspace
            )
            chosen = greedy_select(snap, _GREEDY[cfg.policy.kind])
        else:
            pairs = [(oid, position_at(obj, now)) for oid, obj in on_belt.items()]
            snap = _capped_snapshot(pairs, cfg.policy, cfg.model, cfg.workspace)
            plan = _plan_snapshot(snap, cfg.policy)
            chosen = plan.order[0] if plan.order else min(on_belt)
        out = outcomes[chosen]
        events.append(PickEvent(chosen, now, now + out.total_time, out.pick_point))
        now += out.total_time
        del on_belt[chosen]
        picked += 1
    return SimMetrics(
        picked=picked,
        missed=missed,
        total_objects=n,
        total_time=now,
        per_pick_log=events,
    )
