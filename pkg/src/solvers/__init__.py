from .propagator import (
    ChaosPropagator,
    ChaosSolution,
    apply_A,
    chaos_moments,
    generator_symbol,
    reconstruct,
    solve_propagator,
)
from .oracles import (
    IteratedIntegralOracle,
    energy_balance_report,
    iterated_integral_level_norm,
    iterated_integral_tail,
    simplex_rule,
    tail_decay_study,
    truncated_balance,
)
from .monte_carlo import DirectMonteCarloSolver, direct_mc_solve, paired_final_gaps, pathwise_errors, weak_form_residual
from .experiment_system import ExperimentSystem, run_experiment

__all__ = [
    # Propagator
    "ChaosPropagator",
    "ChaosSolution",
    "apply_A",
    "chaos_moments",
    "generator_symbol",
    "reconstruct",
    "solve_propagator",

    # Oracles
    "IteratedIntegralOracle",
    "energy_balance_report",
    "iterated_integral_level_norm",
    "iterated_integral_tail",
    "simplex_rule",
    "tail_decay_study",
    "truncated_balance",

    # Monte Carlo
    "DirectMonteCarloSolver",
    "direct_mc_solve",
    "paired_final_gaps",
    "pathwise_errors",
    "weak_form_residual",

    # Orchestration
    "ExperimentSystem",
    "run_experiment",
]
