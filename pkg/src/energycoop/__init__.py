"""Energy cooperation between two hybrid-powered base stations.

Plan and simulate grid/renewable-supplied base stations that share energy
over a lossy power line and buffer it in lossy finite storage: an offline
LP planner for known profiles, a closed-form greedy online controller, and
a hybrid of the two for partially predictable profiles.
"""

__version__ = "0.1.0"

from .model import (
    BoundViolation,
    ControlAction,
    DischargeExceedsStorage,
    FeasibilityReport,
    InvalidState,
    LengthMismatch,
    NetEnergyProfile,
    StorageState,
    SystemParams,
    Trajectory,
    check_feasible,
    load_trajectory,
    normalize_action,
    save_trajectory,
    step_state,
    total_cost,
)
from .lp import LpProblem, LpSolution, LpStatus, SolverError, lp_solve
from .offline import (
    Stage2Infeasible,
    build_stage1,
    build_stage2,
    plan_offline,
    plan_single_bs,
)
from .greedy import (
    GammaOutOfRange,
    greedy_step,
    greedy_step_lp,
    greedy_step_with_case,
    run_greedy,
)
from .hybrid import (
    DecomposedProfile,
    HybridResult,
    residual_profile,
    run_hybrid,
    run_hybrid_stream,
)
from .profiles import (
    ParseError,
    add_gaussian_noise,
    load_profile,
    save_profile,
    sinusoid,
)
from .experiments import (
    ExperimentResult,
    ExperimentSpec,
    default_spec,
    run_experiment,
    write_result,
)
