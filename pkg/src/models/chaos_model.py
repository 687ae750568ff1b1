import math
from enum import Enum
from typing import Iterable, Iterator, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# Célula (i, k): i = modo temporal, k = ruído; ambos começam em 1
Cell = Tuple[int, int]


class HermiteConvention(str, Enum):
    SIGNED = "signed"            # H_n(t) = e^{t²/2} dⁿ/dtⁿ e^{−t²/2} = (−1)ⁿ He_n(t)
    PROBABILIST = "probabilist"  # He_n(t)

    @property
    def noise_sign(self) -> int:
        """Sinal do termo de ruído da equação de Ito resolvida por Σ θ_α ξ_α."""
        return -1 if self is HermiteConvention.SIGNED else 1


class TimeBasis(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    T: float = Field(1.0, description="Horizonte T > 0")
    n_t: int = Field(..., description="Número de modos temporais retidos")

    @model_validator(mode="after")
    def _check(self) -> "TimeBasis":
        if self.T <= 0.0:
            raise ValueError("time horizon must satisfy T > 0")
        if self.n_t < 1:
            raise ValueError("time basis needs n_t ≥ 1")
        return self


class MultiIndex(BaseModel):
    """α = (α_i^k) esparso; entries guarda (i, k, contagem) ordenado por célula."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    entries: Tuple[Tuple[int, int, int], ...] = ()

    @field_validator("entries", mode="before")
    @classmethod
    def _normalize(cls, value):
        merged = {}
        for i, k, count in value:
            if i < 1 or k < 1:
                raise ValueError(f"cell ({i}, {k}) must have 1-based indices")
            merged[(int(i), int(k))] = merged.get((int(i), int(k)), 0) + int(count)
        for (i, k), count in merged.items():
            if count < 0:
                raise ValueError(f"cell ({i}, {k}) has negative count {count}")
        return tuple((i, k, c) for (i, k), c in sorted(merged.items()) if c > 0)

    @classmethod
    def zero(cls) -> "MultiIndex":
        return cls(entries=())

    @classmethod
    def from_cells(cls, cells: Iterable[Cell]) -> "MultiIndex":
        return cls(entries=[(i, k, 1) for i, k in cells])

    def order(self) -> int:
        return sum(c for _, _, c in self.entries)

    def factorial(self) -> int:
        return math.prod(math.factorial(c) for _, _, c in self.entries)

    def count(self, i: int, k: int) -> int:
        for ii, kk, c in self.entries:
            if (ii, kk) == (i, k):
                return c
        return 0

    def cells(self) -> Iterator[Cell]:
        for i, k, _ in self.entries:
            yield (i, k)

    def cell_sequence(self) -> Tuple[Cell, ...]:
        """Células repetidas pela multiplicidade, em ordem crescente."""
        return tuple((i, k) for i, k, c in self.entries for _ in range(c))

    def decrement(self, i: int, k: int) -> "MultiIndex":
        """α⁻(i,k); decrementar abaixo de zero é erro de programação."""
        if self.count(i, k) == 0:
            raise ValueError(f"cannot decrement empty cell ({i}, {k}) of {self.entries}")
        return MultiIndex(entries=list(self.entries) + [(i, k, -1)])

    def increment(self, i: int, k: int) -> "MultiIndex":
        return MultiIndex(entries=list(self.entries) + [(i, k, 1)])

    def fits(self, n_t: int, n_w: int) -> bool:
        return all(i <= n_t and k <= n_w for i, k, _ in self.entries)

    def __add__(self, other: "MultiIndex") -> "MultiIndex":
        return MultiIndex(entries=list(self.entries) + list(other.entries))

    def label(self) -> str:
        if not self.entries:
            return "0"
        return "+".join(f"{c}({i},{k})" if c > 1 else f"({i},{k})" for i, k, c in self.entries)


class GaussianSample(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", arbitrary_types_allowed=True)

    xi: np.ndarray = Field(..., description="Matriz ξ_ik (linhas i = 1..n_t, colunas k = 1..n_w)")
    seed: int = Field(0, description="Semente mestre de proveniência")
    stream: int = Field(0, description="Índice do contador (amostra s do experimento)")

    @field_validator("xi", mode="before")
    @classmethod
    def _freeze(cls, value):
        arr = np.array(value, dtype=float)
        if arr.ndim != 2:
            raise ValueError("xi must be a 2-D matrix indexed (i, k)")
        if not np.all(np.isfinite(arr)):
            raise ValueError("xi entries must be finite")
        arr.flags.writeable = False
        return arr

    @property
    def n_t(self) -> int:
        return int(self.xi.shape[0])

    @property
    def n_w(self) -> int:
        return int(self.xi.shape[1])

    def value(self, i: int, k: int) -> float:
        if not (1 <= i <= self.n_t and 1 <= k <= self.n_w):
            raise ValueError(f"cell ({i}, {k}) outside sample of shape {self.xi.shape}")
        return float(self.xi[i - 1, k - 1])

    @staticmethod
    def seed_sequence(master_seed: int, stream: int, purpose: int = 0) -> np.random.SeedSequence:
        """Semente por contador: (master_seed, stream, purpose) independe da ordem de geração."""
        return np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(stream), int(purpose)))

    @classmethod
    def draw(cls, n_t: int, n_w: int, master_seed: int, stream: int) -> "GaussianSample":
        rng = np.random.default_rng(cls.seed_sequence(master_seed, stream, 0))
        return cls(xi=rng.standard_normal((n_t, n_w)), seed=master_seed, stream=stream)

    def residual_rng(self) -> np.random.Generator:
        """Fluxo independente usado para o ruído fino do Monte Carlo."""
        return np.random.default_rng(self.seed_sequence(self.seed, self.stream, 1))

    def truncated(self, n_t: int, n_w: int) -> "GaussianSample":
        if n_t > self.n_t or n_w > self.n_w:
            raise ValueError("cannot truncate a sample to a larger shape")
        return GaussianSample(xi=self.xi[:n_t, :n_w], seed=self.seed, stream=self.stream)
