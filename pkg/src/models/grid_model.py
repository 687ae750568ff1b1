from enum import Enum
from typing import Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

# Frequência inteira no toro 2π-periódico
WaveVector = Tuple[int, ...]


class Parity(str, Enum):
    COS = "cos"
    SIN = "sin"


def as_wavevector(z: Sequence[int], dim: int) -> WaveVector:
    """Normaliza uma sequência para WaveVector e confere a dimensão."""
    if len(z) != dim:
        raise ValueError(f"wavevector {tuple(z)} has dimension {len(z)}, expected {dim}")
    out = []
    for c in z:
        if int(c) != c:
            raise ValueError(f"wavevector components must be integers, got {tuple(z)}")
        out.append(int(c))
    return tuple(out)


def sup_norm(z: Sequence[int]) -> int:
    return max((abs(int(c)) for c in z), default=0)


class GridSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    dim: int = Field(2, description="Dimensão d do toro (d ≥ 2)")
    base_radius: int = Field(4, description="Raio K₀ do suporte inicial")
    growth_cap: int = Field(..., description="Raio máximo K_max permitido após multiplicações")

    @model_validator(mode="after")
    def _check_radii(self) -> "GridSpec":
        if self.dim < 2:
            raise ValueError("dim must satisfy d ≥ 2 (x ∈ R^d, d > 1)")
        if not (0 < self.base_radius <= self.growth_cap):
            raise ValueError("grid radii must satisfy 0 < base_radius ≤ growth_cap")
        return self

    @classmethod
    def for_chaos(cls, dim: int, base_radius: int, shell_radius: int, order: int) -> "GridSpec":
        """growth_cap = K₀ + N·max|z|∞, suficiente para um propagador sem aliasing."""
        return cls(dim=dim, base_radius=base_radius, growth_cap=base_radius + order * shell_radius)

    def check_radius(self, radius: int) -> None:
        from ..exceptions import GridOverflowError

        if radius > self.growth_cap:
            raise GridOverflowError(radius, self.growth_cap)
