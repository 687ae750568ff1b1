from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .chaos_model import HermiteConvention

# Tolerância relativa para considerar T um múltiplo inteiro de dt
_GRID_MATCH = 1e-9


class PropagatorConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    nu: float = Field(1.0, description="Viscosidade ν ≥ 0")
    T: float = Field(1.0, description="Horizonte de tempo")
    n_t: int = Field(3, description="Modos temporais retidos")
    n_w: int = Field(..., description="Modos de ruído ativos (par, pares cos/sin juntos)")
    N: int = Field(3, description="Ordem máxima do caos")
    dt: float = Field(1.0 / 512.0, description="Passo do integrador")
    output_times: Tuple[float, ...] = Field(
        default=(), description="Instantes de saída crescentes em [0, T]; vazio usa 0, T/4, ..., T"
    )
    hermite: HermiteConvention = Field(HermiteConvention.SIGNED, description="Convenção de Hermite")

    @model_validator(mode="before")
    @classmethod
    def _default_outputs(cls, data):
        if isinstance(data, dict) and not data.get("output_times"):
            T = float(data.get("T", 1.0))
            data = {**data, "output_times": tuple(T * j / 4.0 for j in range(5))}
        return data

    @model_validator(mode="after")
    def _check(self) -> "PropagatorConfig":
        if self.nu < 0.0:
            raise ValueError(f"nu={self.nu} violates ν ≥ 0")
        if self.T <= 0.0:
            raise ValueError("time horizon must satisfy T > 0")
        if self.dt <= 0.0:
            raise ValueError(f"dt={self.dt} violates dt > 0")
        if self.n_t < 1:
            raise ValueError("time basis needs n_t ≥ 1")
        if self.n_w < 0 or self.n_w % 2:
            raise ValueError(f"n_w={self.n_w} must be a nonnegative even number (cos/sin pairs)")
        if self.N < 0:
            raise ValueError(f"N={self.N} violates N ≥ 0")
        ratio = self.T / self.dt
        if abs(ratio - round(ratio)) > _GRID_MATCH * max(1.0, ratio):
            raise ValueError(f"T={self.T} is not an integer multiple of dt={self.dt}")
        times = list(self.output_times)
        if any(t < 0.0 or t > self.T for t in times):
            raise ValueError(f"output_times must lie in [0, T={self.T}]")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("output_times must be strictly increasing")
        self.output_steps()
        return self

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.dt))

    def output_steps(self) -> List[int]:
        """Índices de passo dos instantes de saída; erro se o ajuste à grade excede dt/2."""
        steps = []
        for t in self.output_times:
            step = int(round(t / self.dt))
            if abs(step * self.dt - t) > 0.5 * self.dt:
                raise ValueError(f"output time {t} cannot be snapped to the dt grid")
            steps.append(min(step, self.n_steps))
        if len(set(steps)) != len(steps):
            raise ValueError("two output times snap to the same step; refine dt")
        return steps

    def snapped_times(self) -> List[float]:
        return [step * self.dt for step in self.output_steps()]

    def time_index(self, t: float) -> Optional[int]:
        """Posição de t entre os instantes de saída (após ajuste), ou None."""
        for position, snapped in enumerate(self.snapped_times()):
            if abs(snapped - t) <= 0.5 * self.dt:
                return position
        return None

    def with_updates(self, **changes) -> "PropagatorConfig":
        data = self.model_dump()
        data.update(changes)
        if "T" in changes and "output_times" not in changes:
            data["output_times"] = ()
        return PropagatorConfig(**data)

    @property
    def multiindex_count(self) -> int:
        from math import comb

        return comb(self.n_t * self.n_w + self.N, self.N)
