"""Closed-loop finite-blocklength reliability modeling and allocation.

A closed loop (uplink request + downlink response) must finish within a
shared blocklength budget while the uplink spends a fixed energy budget.
This package models the per-link finite-blocklength error rates, couples
uplink power to blocklength through the energy budget, and solves for
the reliability-optimal split of the frame, with sweep/validation
tooling and a CLI on top.
"""

from .fbl import (
    LinkState,
    SystemConfig,
    capacity,
    dispersion,
    fbl_error_rate,
    log_q,
    loop_error_approx,
    loop_reliability,
    q_function,
    snr,
)
from .energy import (
    DomainBounds,
    Infeasible,
    UpperBound,
    feasible_domain,
    snr_blocklength_product,
    ul_power_of_blocklength,
    ul_snr_of_blocklength,
)
from .derivatives import (
    DerivativeBundle,
    ScanReport,
    convexity_scan,
    d_eps_cl_dn,
    d_eps_cl_sign,
    d_eps_dl_dn,
    d_eps_ul_dn,
    delta_ul,
    derivative_bundle,
    fd_derivative,
    loop_log_error,
)
from .optimizer import (
    OptimizerCase,
    SolveResult,
    check_feasibility,
    optimize_continuous,
    refine_integer,
    solve,
)
from .experiments import (
    MonteCarloResult,
    SweepRecord,
    grid_search_oracle,
    monte_carlo_validate,
    noise_grid,
    run_case_study,
    sweep_noise,
)
from .scenario import Scenario, ScenarioError, load_scenario, parse_scenario

__version__ = "0.1.0"

__all__ = [
    "LinkState",
    "SystemConfig",
    "capacity",
    "dispersion",
    "fbl_error_rate",
    "log_q",
    "loop_error_approx",
    "loop_reliability",
    "q_function",
    "snr",
    "DomainBounds",
    "Infeasible",
    "UpperBound",
    "feasible_domain",
    "snr_blocklength_product",
    "ul_power_of_blocklength",
    "ul_snr_of_blocklength",
    "DerivativeBundle",
    "ScanReport",
    "convexity_scan",
    "d_eps_cl_dn",
    "d_eps_cl_sign",
    "d_eps_dl_dn",
    "d_eps_ul_dn",
    "delta_ul",
    "derivative_bundle",
    "fd_derivative",
    "loop_log_error",
    "OptimizerCase",
    "SolveResult",
    "check_feasibility",
    "optimize_continuous",
    "refine_integer",
    "solve",
    "MonteCarloResult",
    "SweepRecord",
    "grid_search_oracle",
    "monte_carlo_validate",
    "noise_grid",
    "run_case_study",
    "sweep_noise",
    "Scenario",
    "ScenarioError",
    "load_scenario",
    "parse_scenario",
    "__version__",
]
