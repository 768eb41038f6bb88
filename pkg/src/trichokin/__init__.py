"""Simulation and asymptotic analysis of a four-state Trichoderma kinetics model.

State (X, B, s, P): organic matter, living biomass, substrate, enzyme product [g/L].
"""

from .analysis import (
    EigenReport,
    LimitPrediction,
    TransformContext,
    attractor_interval,
    build_transform,
    equilibrium_eigenvalues,
    integrate_transformed,
    lyapunov_Z,
    lyapunov_Z_derivative,
    predict_limits,
    trajectory_integrals,
    transformed_eigenvalues,
    transformed_rhs,
)
from .harness import RunSummary, emit_outputs, run_scenario, run_sweep
from .integrator import IntegrationError, SimulationConfig, Trajectory, convergence_order, integrate
from .kinetics import (
    DomainError,
    GrowthLaw,
    ModelParams,
    Monod,
    State,
    growth_rate,
    growth_rate_derivative,
    rhs,
    validate_hypotheses,
)
from .scenarios import BUILTIN_SCENARIOS, BUILTIN_SWEEPS, Scenario, SweepSpec, load_scenario, load_sweep

__version__ = "0.1.0"
