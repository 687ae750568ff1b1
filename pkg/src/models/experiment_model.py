from datetime import datetime
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .grid_model import GridSpec, Parity, sup_norm
from .propagator_model import PropagatorConfig
from .velocity_model import CovarianceSpec


class ExperimentKind(str, Enum):
    VALIDATE_BASIS = "validate-basis"
    PROPAGATE = "propagate"
    ENERGY = "energy"
    COMPARE_MC = "compare-mc"
    CONVERGENCE = "convergence"

    @property
    def propagates(self) -> bool:
        return self is not ExperimentKind.VALIDATE_BASIS


class InitialConditionPreset(str, Enum):
    SINGLE_MODE = "single-mode"
    TWO_MODE = "two-mode"
    RANDOM_BAND = "random-band"


def half_lattice_mode_count(dim: int, shell_radius: int) -> int:
    """Número de σ_k da base: (d−1) polarizações × 2 paridades por z do semi-reticulado."""
    return ((2 * shell_radius + 1) ** dim - 1) * (dim - 1)


class InitialConditionSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    preset: InitialConditionPreset = Field(InitialConditionPreset.TWO_MODE, description="Preset de θ₀")
    wavevector: Optional[Tuple[int, ...]] = Field(None, description="z do preset single-mode (padrão e₁)")
    amplitude: float = Field(1.0, description="Amplitude do preset single-mode")
    parity: Parity = Field(Parity.COS, description="Portadora do preset single-mode")
    radius: int = Field(2, description="Raio |z|∞ do preset random-band")
    decay: float = Field(2.0, description="Decaimento espectral (1+|z|²)^{−decay/2} do random-band")
    seed: int = Field(0, description="Semente do random-band")

    @model_validator(mode="after")
    def _check(self) -> "InitialConditionSpec":
        if self.radius < 1:
            raise ValueError("initial_condition.radius must be ≥ 1")
        if self.wavevector is not None and not any(self.wavevector):
            raise ValueError("single-mode wavevector must be nonzero")
        return self

    def required_radius(self, dim: int) -> int:
        """Raio |z|∞ que θ₀ ocupa."""
        if self.preset is InitialConditionPreset.SINGLE_MODE:
            return sup_norm(self.wavevector or (1,) + (0,) * (dim - 1))
        if self.preset is InitialConditionPreset.TWO_MODE:
            return 2
        return self.radius


class MonteCarloSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    dt_mc: float = Field(1.0 / 1024.0, description="Passo do estimador de momentos")
    pathwise_dt_mc: float = Field(1.0 / 4096.0, description="Passo fino da comparação trajetória a trajetória")
    pathwise_paths: int = Field(50, description="Trajetórias da comparação pathwise")
    pathwise_orders: Tuple[int, ...] = Field((1, 2, 3), description="Ordens N comparadas pathwise")
    galerkin_radius: Optional[int] = Field(None, description="Raio da grade de Galerkin (padrão growth_cap)")

    @model_validator(mode="after")
    def _check(self) -> "MonteCarloSection":
        if self.dt_mc <= 0.0 or self.pathwise_dt_mc <= 0.0:
            raise ValueError("dt_mc must satisfy dt_mc > 0")
        if self.pathwise_paths < 1:
            raise ValueError("monte_carlo.pathwise_paths must be ≥ 1")
        if any(n < 0 for n in self.pathwise_orders):
            raise ValueError("monte_carlo.pathwise_orders must be nonnegative")
        return self


class OracleSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    levels: Tuple[int, ...] = Field((1, 2), description="Níveis comparados com a quadratura iterada")
    quad_order: Optional[int] = Field(None, description="Ordem Gauss–Legendre (padrão 24/12/8 por nível)")

    @model_validator(mode="after")
    def _check(self) -> "OracleSection":
        if any(n < 0 or n > 3 for n in self.levels):
            raise ValueError("oracle.levels must lie in 0..3")
        if self.quad_order is not None and self.quad_order < 1:
            raise ValueError("oracle.quad_order must be ≥ 1")
        return self


class ConvergenceSection(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    N_values: Tuple[int, ...] = Field((1, 2, 3), description="Ordens N da tabela de truncamento")
    shell_radii: Tuple[int, ...] = Field((1, 2, 3, 4), description="Raios R da tabela de c₀")
    n_t_values: Tuple[int, ...] = Field((1, 2, 4, 8), description="n_t da tabela da base temporal")
    dt_values: Tuple[float, ...] = Field(
        (1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0), description="Passos do estudo de ordem"
    )
    reference_dt: float = Field(1.0 / 1024.0, description="Passo da solução de referência")

    @model_validator(mode="after")
    def _check(self) -> "ConvergenceSection":
        if len(self.dt_values) < 2:
            raise ValueError("convergence.dt_values needs at least two steps")
        if any(dt <= 0.0 for dt in self.dt_values) or self.reference_dt <= 0.0:
            raise ValueError("convergence steps must satisfy dt > 0")
        if self.reference_dt >= min(self.dt_values):
            raise ValueError("convergence.reference_dt must be finer than every dt_values entry")
        if any(r < 1 for r in self.shell_radii) or any(n < 1 for n in self.n_t_values):
            raise ValueError("convergence radii and n_t values must be ≥ 1")
        return self


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: ExperimentKind = Field(..., description="Estudo a executar")
    dim: int = Field(2, description="Dimensão d")
    covariance: CovarianceSpec = Field(default_factory=CovarianceSpec, description="Espectro da velocidade")
    shell_radius: int = Field(2, description="Corte |z|∞ ≤ R da base de velocidade")
    grid: GridSpec = Field(..., description="Grade espectral")
    propagator: PropagatorConfig = Field(..., description="Truncamento e integração do caos")
    initial_condition: InitialConditionSpec = Field(
        default_factory=InitialConditionSpec, description="Preset de θ₀"
    )
    master_seed: int = Field(0, description="Semente mestre (contador por amostra)")
    n_paths: int = Field(2000, description="Trajetórias de Monte Carlo")
    out_dir: str = Field("results", description="Diretório de saída")
    dump_max_level: int = Field(2, description="Maior nível |α| escrito no dump de coeficientes")
    monte_carlo: MonteCarloSection = Field(default_factory=MonteCarloSection)
    oracle: OracleSection = Field(default_factory=OracleSection)
    convergence: ConvergenceSection = Field(default_factory=ConvergenceSection)

    @model_validator(mode="after")
    def _check_consistency(self) -> "ExperimentConfig":
        if self.covariance.dim != self.dim or self.grid.dim != self.dim:
            raise ValueError("covariance.dim and grid.dim must equal dim")
        if self.shell_radius < 1:
            raise ValueError(f"shell_radius={self.shell_radius} violates shell_radius ≥ 1")
        if self.master_seed < 0:
            raise ValueError("master_seed must be a nonnegative integer")
        if self.n_paths < 2:
            raise ValueError("n_paths must satisfy n_paths ≥ 2")
        if self.dump_max_level < 0:
            raise ValueError("dump_max_level must be ≥ 0")
        needed_ic = self.initial_condition.required_radius(self.dim)
        if needed_ic > self.grid.base_radius:
            raise ValueError(
                f"initial condition needs radius {needed_ic} > grid.base_radius={self.grid.base_radius}"
            )
        if self.propagator.n_w > self.n_modes:
            raise ValueError(
                f"propagator.n_w={self.propagator.n_w} exceeds the {self.n_modes} modes of the basis"
            )
        if self.kind.propagates:
            needed = self.grid.base_radius + self.propagator.N * self.shell_radius
            if self.grid.growth_cap < needed:
                raise ValueError(
                    f"grid.growth_cap={self.grid.growth_cap} must be ≥ base_radius + N·shell_radius = {needed}"
                )
        return self

    @property
    def n_modes(self) -> int:
        return half_lattice_mode_count(self.dim, self.shell_radius)

    def echo(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")


class RunManifest(BaseModel):
    config: Dict[str, Any] = Field(..., description="Eco da configuração com padrões aplicados")
    code_version: str = Field(..., description="Versão do chaos-transport")
    hermite_convention: str = Field(..., description="Convenção de Hermite ativa")
    noise_sign: int = Field(..., description="Sinal do termo de ruído de Ito")
    settings: Dict[str, Any] = Field(default_factory=dict, description="Resumo do ChaosSettings")
    started_at: datetime = Field(default_factory=datetime.now, description="Início da execução")
    finished_at: Optional[datetime] = Field(None, description="Fim da execução")
    wall_clock_s: Optional[float] = Field(None, description="Duração em segundos")
    planned_files: List[str] = Field(default_factory=list, description="Arquivos previstos")
    files: List[str] = Field(default_factory=list, description="Arquivos efetivamente escritos")
    status: str = Field("running", description="running | passed | breached | failed")
    breaches: List[str] = Field(default_factory=list, description="Invariantes violados")

    def add_file(self, name: str) -> None:
        if name not in self.files:
            self.files.append(name)

    def complete(self, status: str) -> None:
        self.finished_at = datetime.now()
        self.wall_clock_s = (self.finished_at - self.started_at).total_seconds()
        self.status = status
