from .spectral_field import (
    SpectralField,
    inner_product,
    gradient,
    divergence,
    heat_semigroup_apply,
    mode_multiply_shift,
    evaluate,
)
from .velocity_basis import (
    spectral_density,
    build_divergence_free_basis,
    covariance_at_zero,
    apply_Mk,
    AdvectionOperator,
)
from .chaos_basis import (
    time_basis_eval,
    hermite_eval,
    enumerate_multiindices,
    xi_alpha,
    brownian_from_sample,
    ChaosIndexSet,
)
from .csv_tool import ResultWriter, read_table, read_sample
from .initial_conditions import build_initial_condition, random_band_field
from .parallel import WorkerPool

__all__ = [
    # Spectral field
    "SpectralField",
    "inner_product",
    "gradient",
    "divergence",
    "heat_semigroup_apply",
    "mode_multiply_shift",
    "evaluate",

    # Velocity model
    "spectral_density",
    "build_divergence_free_basis",
    "covariance_at_zero",
    "apply_Mk",
    "AdvectionOperator",

    # Chaos basis
    "time_basis_eval",
    "hermite_eval",
    "enumerate_multiindices",
    "xi_alpha",
    "brownian_from_sample",
    "ChaosIndexSet",

    # Output and helpers
    "ResultWriter",
    "read_table",
    "read_sample",
    "build_initial_condition",
    "random_band_field",
    "WorkerPool",
]
