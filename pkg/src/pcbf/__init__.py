"""Predictive control barrier function safety filters for discrete-time
linear systems, with an active-set constrained least-squares solver and
closed-loop simulation harnesses."""

from .barrier import (
    FILTER_INACTIVE,
    FILTER_INFEASIBLE,
    FILTER_PROJECTING,
    AffineBarrierChain,
    PcbfFilter,
    PolytopicBarrier,
    apply_filter,
    assemble_pcbf,
    build_affine_chain,
    chain_constraint_row,
    chain_membership,
    eval_barrier,
    in_safe_set,
    one_step_condition,
)
from .config import ConfigError, ReferenceProfile, ScenarioConfig, from_dict, load_config
from .controllers import ConvergenceError, LqrIntController, dare_gain, solve_dare
from .harness import ScenarioError, run_scenario, sweep_param
from .lifting import LiftedModel, LtiModel, augment_delay, lift, relative_degree
from .linalg import (
    ShapeError,
    SingularMatrixError,
    as_matrix,
    column,
    mat_mul,
    mat_pow,
    power_sum,
    solve,
)
from .plants import (
    BicopterCascade,
    BicopterParams,
    BicopterState,
    DelayedDoubleIntegrator,
    DivergenceError,
    bicopter_attitude_model,
    bicopter_deriv,
    bicopter_position_model,
    double_integrator_model,
    f_map,
    rk4_step,
)
from .qls import (
    STATUS_INFEASIBLE,
    STATUS_ITERATION_LIMIT,
    STATUS_OPTIMAL,
    KktReport,
    QlsProblem,
    QlsSolution,
    check_kkt,
    solve_qls,
)
from .trace import (
    SimTrace,
    ViolationReport,
    read_trace,
    report_violations,
    violation_flags,
    write_trace,
)

__version__ = "0.1.0"
