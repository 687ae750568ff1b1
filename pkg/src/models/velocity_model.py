import math
from typing import Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .grid_model import Parity, WaveVector, sup_norm


class CovarianceSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    A0: float = Field(1.0, description="Amplitude A₀ > 0 do espectro")
    a: float = Field(0.0, description="Peso da parte gradiente (a ≥ 0)")
    b: float = Field(1.0, description="Peso da parte solenoidal (b ≥ 0)")
    alpha_spec: float = Field(1.0, description="Expoente espectral α, 0 < α < 2")
    dim: int = Field(2, description="Dimensão d ≥ 2")

    @model_validator(mode="after")
    def _check_spectrum(self) -> "CovarianceSpec":
        if not (0.0 < self.alpha_spec < 2.0):
            raise ValueError(f"alpha_spec={self.alpha_spec} violates 0 < α < 2")
        if self.A0 <= 0.0:
            raise ValueError("A0 must be positive (A₀ > 0)")
        if self.a < 0.0 or self.b < 0.0:
            raise ValueError("weights must satisfy a ≥ 0 and b ≥ 0")
        if self.a + self.b <= 0.0:
            raise ValueError("weights must satisfy a + b > 0")
        if self.dim < 2:
            raise ValueError("dim must satisfy d ≥ 2 (x ∈ R^d, d > 1)")
        return self

    @property
    def is_divergence_free(self) -> bool:
        return self.a == 0.0

    def radial_factor(self, z_squared: float) -> float:
        """A₀(1+|z|²)^{−(d+α)/2}"""
        return self.A0 * (1.0 + z_squared) ** (-(self.dim + self.alpha_spec) / 2.0)

    def solenoidal_density(self, z_squared: float) -> float:
        """Â(z) = A₀·b/((d−1)(1+|z|²)^{(d+α)/2})"""
        return self.radial_factor(z_squared) * self.b / (self.dim - 1)


class VelocityMode(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    wavevector: WaveVector = Field(..., description="z ≠ 0 do semi-reticulado")
    polarization: Tuple[float, ...] = Field(..., description="Vetor unitário e com e·z = 0")
    amplitude: float = Field(..., description="s = sqrt(2·Â(z))")
    parity: Parity = Field(..., description="Portadora cos ou sin")

    @model_validator(mode="after")
    def _check_mode(self) -> "VelocityMode":
        if len(self.polarization) != len(self.wavevector):
            raise ValueError("polarization and wavevector dimensions differ")
        if not any(self.wavevector):
            raise ValueError("velocity modes need z ≠ 0")
        e = np.asarray(self.polarization, dtype=float)
        z = np.asarray(self.wavevector, dtype=float)
        if abs(float(e @ e) - 1.0) > 1e-14:
            raise ValueError("polarization must be a unit vector")
        if abs(float(e @ z)) > 1e-14 * max(1.0, float(np.linalg.norm(z))):
            raise ValueError("polarization must satisfy e·z = 0")
        if self.amplitude <= 0.0:
            raise ValueError("amplitude must be positive")
        return self

    @property
    def reach(self) -> int:
        return sup_norm(self.wavevector)


class VelocityBasis(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    spec: CovarianceSpec = Field(..., description="Espectro de covariância")
    modes: Tuple[VelocityMode, ...] = Field(..., description="Sequência ordenada de σ_k")
    shell_radius: int = Field(..., description="Corte |z|∞ ≤ R")

    @property
    def dim(self) -> int:
        return self.spec.dim

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    @property
    def reach(self) -> int:
        return max((m.reach for m in self.modes), default=0)

    def __len__(self) -> int:
        return len(self.modes)

    def select(self, indices: Sequence[int]) -> "VelocityBasis":
        """Sub-base com os modos de índices dados (ordem preservada)."""
        chosen = tuple(self.modes[i] for i in indices)
        return VelocityBasis(spec=self.spec, modes=chosen, shell_radius=self.shell_radius)

    def leading(self, n_w: int) -> "VelocityBasis":
        """Os n_w primeiros modos; n_w precisa manter os pares cos/sin juntos."""
        if n_w < 0 or n_w > self.n_modes:
            raise ValueError(f"n_w={n_w} outside 0..{self.n_modes}")
        if n_w % 2:
            raise ValueError("n_w must be even so that cos/sin partners stay together")
        return self.select(range(n_w))

    def wavevectors(self) -> np.ndarray:
        return np.array([m.wavevector for m in self.modes], dtype=int).reshape(-1, self.dim)

    def polarizations(self) -> np.ndarray:
        return np.array([m.polarization for m in self.modes], dtype=float).reshape(-1, self.dim)

    def get_summary(self) -> dict:
        return {
            "dim": self.dim,
            "n_modes": self.n_modes,
            "shell_radius": self.shell_radius,
            "alpha_spec": self.spec.alpha_spec,
            "max_amplitude": max((m.amplitude for m in self.modes), default=0.0),
            "min_amplitude": min((m.amplitude for m in self.modes), default=math.nan),
        }
