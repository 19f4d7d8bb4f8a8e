"""screenlab: equilibria and precision sweeps for noisy costly-signaling screening."""

from .commitment import CommitmentSolution, committed_value, solve_commitment
from .config import ConfigError, RunConfig, build_game, load_config, parse_config
from .environment import (
    Environment,
    InfeasibleEnvironmentError,
    OutOfScopeEnvironmentError,
    QuadratureError,
    quad,
)
from .equilibrium import (
    Equilibrium,
    NoiseTooLargeError,
    ScreeningGame,
    SolverInconsistencyError,
    ThresholdNotFoundError,
    UndefinedStandardError,
)
from .extensions import (
    BinaryEffortEquilibrium,
    CostSpec,
    GeneralCostEquilibrium,
    binary_effort_equilibrium,
    convex_cost_best_response,
    linear_reputation,
    quadratic_cost,
    solve_convex_cost_equilibrium,
)
from .noise import NoiseModel, NoiseReport, SingularPointError, make_noise, validate_noise
from .oracle import (
    MonteCarloEstimate,
    OracleReport,
    monte_carlo_welfare,
    verify_agent_best_response,
    verify_principal_indifference,
)
from .welfare import (
    AccuracyOrder,
    SweepResult,
    SweepRow,
    WelfareReport,
    accuracy_compare,
    agent_payoff,
    approval_rate,
    default_rho_grid,
    noise_quantile,
    parse_sweep_csv,
    principal_payoff,
    sweep,
    type_errors,
    welfare_report,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyOrder",
    "BinaryEffortEquilibrium",
    "CommitmentSolution",
    "ConfigError",
    "CostSpec",
    "Environment",
    "Equilibrium",
    "GeneralCostEquilibrium",
    "InfeasibleEnvironmentError",
    "MonteCarloEstimate",
    "NoiseModel",
    "NoiseReport",
    "NoiseTooLargeError",
    "OracleReport",
    "OutOfScopeEnvironmentError",
    "QuadratureError",
    "RunConfig",
    "ScreeningGame",
    "SingularPointError",
    "SolverInconsistencyError",
    "SweepResult",
    "SweepRow",
    "ThresholdNotFoundError",
    "UndefinedStandardError",
    "WelfareReport",
    "accuracy_compare",
    "agent_payoff",
    "approval_rate",
    "binary_effort_equilibrium",
    "build_game",
    "committed_value",
    "convex_cost_best_response",
    "default_rho_grid",
    "linear_reputation",
    "load_config",
    "make_noise",
    "monte_carlo_welfare",
    "noise_quantile",
    "parse_config",
    "parse_sweep_csv",
    "principal_payoff",
    "quad",
    "quadratic_cost",
    "solve_commitment",
    "solve_convex_cost_equilibrium",
    "sweep",
    "type_errors",
    "validate_noise",
    "verify_agent_best_response",
    "verify_principal_indifference",
    "welfare_report",
]
