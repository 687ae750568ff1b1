from typing import Dict, List, Optional

from pydantic import BaseModel, Field, model_validator


class EnergyReport(BaseModel):
    """Balanço de energia do caos truncado nos instantes de saída."""

    times: List[float] = Field(..., description="Instantes de saída")
    e_l2: List[float] = Field(..., description="E‖θ_N‖²(t) = Σ_{|α|≤N}‖θ_α(t)‖²")
    dissipation: List[float] = Field(..., description="ν Σ_{|α|≤N} ∫₀ᵗ ‖∇θ_α‖² ds")
    tail: List[float] = Field(..., description="F_N(t) = Σ_{|α|=N} ∫₀ᵗ Σ_k ‖M_k θ_α‖² ds")
    basis_defect: List[float] = Field(..., description="Energia perdida pelos modos temporais truncados")
    residual: List[float] = Field(..., description="e_l2 + dissipation + tail + basis_defect − ‖θ₀‖²")
    theta0_norm_sq: float = Field(..., description="‖θ₀‖²")
    level_norms: Dict[int, List[float]] = Field(
        default_factory=dict, description="Σ_{|α|=n}‖θ_α(t)‖² por nível n"
    )

    @model_validator(mode="after")
    def _check_lengths(self) -> "EnergyReport":
        n = len(self.times)
        for name in ("e_l2", "dissipation", "tail", "basis_defect", "residual"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"column {name} has {len(getattr(self, name))} rows, expected {n}")
        return self

    def max_abs_residual(self) -> float:
        return max((abs(r) for r in self.residual), default=0.0)

    def deficit(self) -> List[float]:
        """‖θ₀‖² − e_l2 − dissipation (= tail + basis_defect)."""
        return [self.theta0_norm_sq - e - d for e, d in zip(self.e_l2, self.dissipation)]

    def rows(self) -> List[List[float]]:
        return [
            [t, e, d, f, b, r]
            for t, e, d, f, b, r in zip(
                self.times, self.e_l2, self.dissipation, self.tail, self.basis_defect, self.residual
            )
        ]

    def get_summary(self) -> dict:
        return {
            "rows": len(self.times),
            "theta0_norm_sq": self.theta0_norm_sq,
            "final_e_l2": self.e_l2[-1] if self.e_l2 else None,
            "final_tail": self.tail[-1] if self.tail else None,
            "max_abs_residual": self.max_abs_residual(),
        }


class McEstimate(BaseModel):
    estimator: str = Field("second_moment_l2", description="Nome do estimador")
    n_paths: int = Field(..., description="Número de trajetórias")
    dt_mc: float = Field(..., description="Passo de Euler–Maruyama")
    value: float = Field(..., description="Média amostral")
    std_error: float = Field(..., description="Erro padrão da média")

    @model_validator(mode="after")
    def _check(self) -> "McEstimate":
        if self.n_paths < 2:
            raise ValueError("a Monte Carlo estimate needs n_paths ≥ 2")
        if self.std_error < 0.0:
            raise ValueError("std_error must be nonnegative")
        if self.dt_mc <= 0.0:
            raise ValueError("dt_mc must be positive")
        return self

    def within(self, lower: float, upper: float, n_sigma: float = 3.0) -> bool:
        slack = n_sigma * self.std_error
        return lower - slack <= self.value <= upper + slack


class TailPoint(BaseModel):
    N: int = Field(..., description="Ordem de truncamento")
    tail: float = Field(..., description="F_N(T)")
    ratio: Optional[float] = Field(None, description="F_N(T) / F_{N−1}(T)")
    partial_sum_gap: float = Field(
        0.0, description="‖θ₀‖² − E‖θ_N‖²(T) − dissipação − tail − defeito da base"
    )
