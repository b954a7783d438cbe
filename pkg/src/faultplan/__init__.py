"""Near-optimal inspect/repair scheduling for fleets of failing components.

The library solves for a policy over the pair (last observed fault
count, steps since that observation), validates it with a
component-level Monte Carlo simulator and an exact linear-solve
evaluator, and ships a CLI for solving, simulating, and rendering
policy maps.
"""

from .config import ConfigError, RunConfig, SimulationSettings, load_config, resolve_horizon
from .model import (
    BLANK,
    Action,
    Blank,
    Observation,
    SystemModel,
    TransitionKernel,
    binom_pmf,
    binom_pmf_vector,
    build_transition,
    kernel_power,
    next_fault_pmf,
    step_cost,
)
from .policy_io import (
    POLICY_COLUMNS,
    PolicyFile,
    PolicyFileError,
    read_policy_csv,
    write_json_report,
    write_policy_csv,
    write_value_csv,
)
from .render import render_policy_png, render_policy_svg, save_policy_image
from .sim import (
    ComponentTrajectory,
    RolloutResult,
    SimulationReport,
    auto_horizon,
    evaluate_policy_exact,
    observe,
    rollout,
    simulate,
    step_components,
    tail_bound,
    trajectory_rng,
)
from .solver import (
    ConvergenceError,
    InformationState,
    Policy,
    ValueTable,
    expected_cost,
    extract_policy,
    horizon_from_epsilon,
    state_update,
    truncation_bound,
    value_iteration,
)

__version__ = "0.1.0"

__all__ = [
    "Action",
    "BLANK",
    "Blank",
    "ComponentTrajectory",
    "ConfigError",
    "ConvergenceError",
    "InformationState",
    "Observation",
    "POLICY_COLUMNS",
    "Policy",
    "PolicyFile",
    "PolicyFileError",
    "RolloutResult",
    "RunConfig",
    "SimulationReport",
    "SimulationSettings",
    "SystemModel",
    "TransitionKernel",
    "ValueTable",
    "auto_horizon",
    "binom_pmf",
    "binom_pmf_vector",
    "build_transition",
    "evaluate_policy_exact",
    "expected_cost",
    "extract_policy",
    "horizon_from_epsilon",
    "kernel_power",
    "load_config",
    "next_fault_pmf",
    "observe",
    "read_policy_csv",
    "render_policy_png",
    "render_policy_svg",
    "resolve_horizon",
    "rollout",
    "save_policy_image",
    "simulate",
    "state_update",
    "step_components",
    "step_cost",
    "tail_bound",
    "trajectory_rng",
    "truncation_bound",
    "value_iteration",
    "write_json_report",
    "write_policy_csv",
    "write_value_csv",
]
