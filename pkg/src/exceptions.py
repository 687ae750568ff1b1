from typing import Optional, Sequence


class ChaosTransportError(Exception):
    """Erro base do sistema."""


class ConfigError(ChaosTransportError, ValueError):
    """Configuração inválida (exit code 2)."""

    def __init__(self, message: str, key: Optional[str] = None):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


class InvariantBreach(ChaosTransportError):
    """Um invariante verificado em tempo de execução falhou (exit code 1)."""

    def __init__(self, invariant: str, detail: str = ""):
        self.invariant = invariant
        self.detail = detail
        message = f"invariant breached: {invariant}"
        if detail:
            message += f" ({detail})"
        super().__init__(message)


class GridOverflowError(ChaosTransportError, ValueError):
    """O raio espectral pedido excede o growth_cap da grade."""

    def __init__(self, requested: int, cap: int):
        self.requested = requested
        self.cap = cap
        super().__init__(f"grid overflow: radius {requested} exceeds growth_cap {cap}")


class ProjectionNotPermitted(ChaosTransportError, ValueError):
    """O produto perderia modos e o chamador não autorizou projeção."""


class UnsupportedRegimeError(ChaosTransportError, ValueError):
    """Regime de covariância sem base construída (a > 0)."""


class NonFiniteFieldError(InvariantBreach):
    def __init__(self, alpha_rank: int, t: float, wavevector: Sequence[int]):
        self.alpha_rank = alpha_rank
        self.t = t
        self.wavevector = tuple(int(c) for c in wavevector)
        super().__init__(
            "finite coefficients",
            f"alpha rank {alpha_rank}, t={t:.17g}, wavevector {self.wavevector}",
        )


class OracleBudgetExceeded(ChaosTransportError, ValueError):
    def __init__(self, estimate: float, budget: float):
        self.estimate = estimate
        self.budget = budget
        super().__init__(
            f"iterated-integral oracle refused: estimated {estimate:.3g} integrand "
            f"evaluations exceed the budget of {budget:.3g}"
        )
