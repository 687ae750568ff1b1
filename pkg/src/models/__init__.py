from .grid_model import WaveVector, Parity, GridSpec, as_wavevector, sup_norm
from .velocity_model import CovarianceSpec, VelocityMode, VelocityBasis
from .chaos_model import Cell, HermiteConvention, TimeBasis, MultiIndex, GaussianSample
from .propagator_model import PropagatorConfig
from .report_model import EnergyReport, McEstimate, TailPoint
from .experiment_model import (
    ExperimentKind,
    InitialConditionPreset,
    InitialConditionSpec,
    MonteCarloSection,
    OracleSection,
    ConvergenceSection,
    ExperimentConfig,
    RunManifest,
    half_lattice_mode_count,
)

__all__ = [
    # Grid models
    "WaveVector",
    "Parity",
    "GridSpec",
    "as_wavevector",
    "sup_norm",

    # Velocity models
    "CovarianceSpec",
    "VelocityMode",
    "VelocityBasis",

    # Chaos models
    "Cell",
    "HermiteConvention",
    "TimeBasis",
    "MultiIndex",
    "GaussianSample",

    # Propagator models
    "PropagatorConfig",

    # Report models
    "EnergyReport",
    "McEstimate",
    "TailPoint",

    # Experiment models
    "ExperimentKind",
    "InitialConditionPreset",
    "InitialConditionSpec",
    "MonteCarloSection",
    "OracleSection",
    "ConvergenceSection",
    "ExperimentConfig",
    "RunManifest",
    "half_lattice_mode_count",
]
