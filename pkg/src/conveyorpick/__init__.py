"""Time-optimal object picking sequences for a robot arm over a moving conveyor."""

from .core import (
    ABS_TOL,
    ConveyorObject,
    PickPlan,
    Point2,
    Workspace,
    position_at,
)
from .robot import (
    Elbow,
    JointProfile,
    MissReason,
    PnpOutcome,
    PnpTimeTable,
    ScaraArm,
    TelescopingArm,
    UnreachableTargetError,
    build_pnp_table,
    get_pnp_time,
    joint_move_time,
    load_table,
    save_table,
    scara_fk,
    scara_ik,
    telescoping_intercept,
    two_object_times,
)
from .sequencing import (
    GreedyPolicy,
    PlanningSnapshot,
    PlanStats,
    evaluate_sequence,
    greedy_select,
    opt_seq,
    opt_seq_dp,
    sub_opt_dp,
)
from .analysis import (
    DeltaTSample,
    OrderDistributionRecord,
    delta_t,
    find_root,
    order_distribution_study,
    sweep_fx,
)
from .sim import (
    OneShotBox,
    PickEvent,
    PoissonArrivals,
    Policy,
    PolicyKind,
    ScenarioConfig,
    SimMetrics,
    UniformSquare,
    run_continuous,
    run_one_shot,
    spawn_one_shot,
    spawn_poisson,
    spawn_uniform_square,
)

__version__ = "0.1.0"

__all__ = [
    "ABS_TOL",
    "ConveyorObject",
    "DeltaTSample",
    "Elbow",
    "GreedyPolicy",
    "JointProfile",
    "MissReason",
    "OneShotBox",
    "OrderDistributionRecord",
    "PickEvent",
    "PickPlan",
    "PlanStats",
    "PlanningSnapshot",
    "PnpOutcome",
    "PnpTimeTable",
    "Point2",
    "PoissonArrivals",
    "Policy",
    "PolicyKind",
    "ScaraArm",
    "ScenarioConfig",
    "SimMetrics",
    "TelescopingArm",
    "UniformSquare",
    "UnreachableTargetError",
    "Workspace",
    "build_pnp_table",
    "delta_t",
    "evaluate_sequence",
    "find_root",
    "get_pnp_time",
    "greedy_select",
    "joint_move_time",
    "load_table",
    "opt_seq",
    "opt_seq_dp",
    "order_distribution_study",
    "position_at",
    "run_continuous",
    "run_one_shot",
    "save_table",
    "scara_fk",
    "scara_ik",
    "spawn_one_shot",
    "spawn_poisson",
    "spawn_uniform_square",
    "sub_opt_dp",
    "sweep_fx",
    "telescoping_intercept",
    "two_object_times",
]
