import logging
from typing import Optional, Tuple

import numpy as np

from ..models.experiment_model import InitialConditionPreset, InitialConditionSpec
from .spectral_field import SpectralField, cube_shape, flip_conjugate, squared_norm

logger = logging.getLogger(__name__)


def random_band_field(
    dim: int, radius: int, decay: float = 2.0, rng: Optional[np.random.Generator] = None, seed: int = 0
) -> SpectralField:
    """Campo real aleatório com |c(z)| ~ (1+|z|²)^{−decay/2} para |z|∞ ≤ radius."""
    generator = rng if rng is not None else np.random.default_rng(seed)
    shape = cube_shape(dim, radius)
    raw = generator.standard_normal(shape) + 1j * generator.standard_normal(shape)
    raw *= (1.0 + squared_norm(dim, radius)) ** (-decay / 2.0)
    data = 0.5 * (raw + flip_conjugate(raw, dim))
    return SpectralField(data, dim, radius, check=False)


def two_mode_wavevectors(dim: int) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    first = (1,) + (0,) * (dim - 1)
    second = (1, 2) + (0,) * (dim - 2)
    return first, second


def build_initial_condition(spec: InitialConditionSpec, dim: int, base_radius: int) -> SpectralField:
    needed = spec.required_radius(dim)
    if needed > base_radius:
        raise ValueError(f"initial condition needs radius {needed} > base_radius {base_radius}")

    if spec.preset is InitialConditionPreset.SINGLE_MODE:
        z = spec.wavevector or (1,) + (0,) * (dim - 1)
        if len(z) != dim:
            raise ValueError(f"initial_condition.wavevector must have {dim} components")
        field = SpectralField.from_mode(z, spec.parity, spec.amplitude)
    elif spec.preset is InitialConditionPreset.TWO_MODE:
        first, second = two_mode_wavevectors(dim)
        field = SpectralField.from_mode(first) + 0.5 * SpectralField.from_mode(second)
    else:
        field = random_band_field(dim, spec.radius, spec.decay, seed=spec.seed)

    logger.debug(f"Initial condition {spec.preset.value}: ‖θ₀‖² = {field.norm_sq():.6g}")
    return field.with_radius(base_radius)
