"""Joint downlink data-size and user-server association optimization for
edge-served virtual worlds.

Utility is total provider earning minus an omega-weighted total latency.
The main entry points are :func:`generate_scenario`, :func:`solve_strategy`
(alternating data-size / association optimization plus three baselines),
:func:`run_comparison` for sweeps, and :func:`run_oracle_suite` for
verification against exhaustive search on small instances.
"""

from .errors import (
    CapacityError,
    ScenarioParseError,
    SolverFailureError,
    ValidationError,
)
from .scenario import (
    Assignment,
    ResolutionPlan,
    Scenario,
    UtilityParams,
    generate_scenario,
    load_scenario,
    save_scenario,
    with_params,
)
from .model import Metrics, earning, evaluate, latency, per_user_latency
from .datasize import optimal_data_sizes, unconstrained_optimum
from .association import (
    Qcqp,
    SdpResiduals,
    SdpSolution,
    build_qcqp,
    encode_assignment,
    exhaustive_association,
    greedy_association,
    local_repair,
    qcqp_objective,
    round_solution,
    solve_sdp_relaxation,
)
from .optimizer import (
    DEFAULT_SAMPLES,
    DEFAULT_SDR_SIZE_CAP,
    STRATEGIES,
    Diagnostics,
    SolveResult,
    alternating_optimize,
    baseline_optimal_earning,
    baseline_optimal_latency,
    baseline_random,
    solve_strategy,
)
from .harness import (
    CSV_HEADER,
    ExperimentRecord,
    OracleConfig,
    OracleReport,
    SweepConfig,
    exhaustive_joint,
    recheck_records,
    run_comparison,
    run_oracle_suite,
    write_records_csv,
)

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "CSV_HEADER",
    "CapacityError",
    "DEFAULT_SAMPLES",
    "DEFAULT_SDR_SIZE_CAP",
    "Diagnostics",
    "ExperimentRecord",
    "Metrics",
    "OracleConfig",
    "OracleReport",
    "Qcqp",
    "ResolutionPlan",
    "Scenario",
    "ScenarioParseError",
    "SdpResiduals",
    "SdpSolution",
    "SolveResult",
    "SolverFailureError",
    "STRATEGIES",
    "SweepConfig",
    "UtilityParams",
    "ValidationError",
    "alternating_optimize",
    "baseline_optimal_earning",
    "baseline_optimal_latency",
    "baseline_random",
    "build_qcqp",
    "earning",
    "encode_assignment",
    "evaluate",
    "exhaustive_association",
    "exhaustive_joint",
    "generate_scenario",
    "greedy_association",
    "latency",
    "load_scenario",
    "local_repair",
    "optimal_data_sizes",
    "per_user_latency",
    "qcqp_objective",
    "recheck_records",
    "round_solution",
    "run_comparison",
    "run_oracle_suite",
    "save_scenario",
    "solve_sdp_relaxation",
    "solve_strategy",
    "unconstrained_optimum",
    "with_params",
    "write_records_csv",
]
