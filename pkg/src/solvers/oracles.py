"""
Oráculos independentes do propagador.

- quadratura iterada de Gauss–Legendre sobre o simplexo 0 < s₁ < … < s_N < t,
  tanto para ruído branco (base temporal completa) quanto para a base finita;
- cauda F_N pela integral (N+1)-upla;
- relatório do balanço de energia e estudo do decaimento da cauda a partir do
  ledger do propagador.
"""

import itertools
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import roots_legendre

from ..config import get_settings
from ..exceptions import OracleBudgetExceeded
from ..models.chaos_model import TimeBasis
from ..models.grid_model import GridSpec
from ..models.propagator_model import PropagatorConfig
from ..models.report_model import EnergyReport, TailPoint
from ..models.velocity_model import VelocityBasis
from ..tools.chaos_basis import ChaosIndexSet, time_basis_values
from ..tools.parallel import WorkerPool
from ..tools.spectral_field import SpectralField, lattice, resize, squared_norm
from ..tools.velocity_basis import AdvectionOperator
from .propagator import ChaosSolution, solve_propagator

logger = logging.getLogger(__name__)

DEFAULT_QUAD_ORDER = {0: 1, 1: 24, 2: 12, 3: 8}

# Pontos de quadratura por unidade de trabalho; fixo para que a soma não dependa dos workers
_POINT_CHUNK = 16


def default_quad_order(N: int) -> int:
    return DEFAULT_QUAD_ORDER.get(N, 8)


def simplex_rule(N: int, t: float, quad_order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nós (P, N) com s₁ < … < s_N e pesos (P,) do simplexo de lado t.

    Mapeamento colapsado: s_N = t·y_N, s_{j−1} = s_j·y_{j−1}, com Gauss–Legendre em cada y_j.
    """
    if N == 0:
        return np.zeros((1, 0)), np.ones(1)
    x, w = roots_legendre(quad_order)
    y = 0.5 * (x + 1.0)
    wy = 0.5 * w
    points = []
    weights = []
    for combo in itertools.product(range(quad_order), repeat=N):
        s = np.zeros(N)
        weight = 1.0
        upper = t
        for level in range(N - 1, -1, -1):
            q = combo[level]
            s[level] = upper * y[q]
            weight *= upper * wy[q]
            upper = s[level]
        points.append(s)
        weights.append(weight)
    return np.array(points), np.array(weights)


class IteratedIntegralOracle:
    """Avalia as cadeias T_{t−s_N}M_{k_N}…M_{k_1}T_{s_1}θ₀ para todos os k-uplos de uma vez."""

    def __init__(
        self,
        theta0: SpectralField,
        basis: VelocityBasis,
        nu: float,
        c0,
        workers: Optional[int] = None,
        budget: Optional[float] = None,
    ):
        self.settings = get_settings()
        self.logger = logging.getLogger(__name__)
        if nu < 0.0:
            raise ValueError(f"nu={nu} violates ν ≥ 0")
        if theta0.dim != basis.dim:
            raise ValueError("theta0 and basis dimensions differ")
        self.theta0 = theta0
        self.basis = basis
        self.nu = nu
        self.c0 = c0
        self.workers = workers
        self.budget = self.settings.oracle_cost_budget if budget is None else budget
        self.operator = AdvectionOperator(basis)
        self.dim = theta0.dim
        self.base = theta0.effective_radius()
        self.reach = basis.reach

    # Semigrupo gerado por ½(νΔ + C^{ij}(0)D_iD_j)
    def _rate(self, radius: int) -> np.ndarray:
        if np.ndim(self.c0) == 0:
            kappa = 0.5 * (self.nu + float(self.c0))
            return -kappa * squared_norm(self.dim, radius)
        matrix = np.asarray(self.c0, dtype=float)
        z = lattice(self.dim, radius)
        quadratic = sum(matrix[a, b] * z[a] * z[b] for a in range(self.dim) for b in range(self.dim))
        return -0.5 * (self.nu * squared_norm(self.dim, radius) + quadratic)

    def _semigroup(self, arr: np.ndarray, radius: int, s: float) -> np.ndarray:
        return np.exp(max(s, 0.0) * self._rate(radius)) * arr

    def _advect_all(self, stack: np.ndarray, in_radius: int) -> np.ndarray:
        """Aplica todos os M_k: (m, cubo) → (m·n_w, cubo), índice (k_anteriores, k) em ordem linha."""
        out_radius = in_radius + self.reach
        if not self.basis.n_modes:
            return np.zeros((0,) + (2 * out_radius + 1,) * self.dim, dtype=complex)
        results = [
            self.operator.apply_array(k, stack, in_radius, out_radius) for k in range(self.basis.n_modes)
        ]
        stacked = np.stack(results, axis=1)
        return stacked.reshape((-1,) + stacked.shape[2:])

    def chain(self, s: Sequence[float], t: float) -> Tuple[np.ndarray, int]:
        """Pilha (n_w^N, cubo) de T_{t−s_N}M_{k_N}…T_{s₂−s₁}M_{k₁}T_{s₁}θ₀."""
        radius = self.base
        current = resize(self.theta0.data, self.dim, self.theta0.support_radius, radius)[None]
        previous = 0.0
        for s_j in s:
            current = self._semigroup(current, radius, s_j - previous)
            current = self._advect_all(current, radius)
            radius += self.reach
            previous = s_j
        return self._semigroup(current, radius, t - previous), radius

    def _norm_sq(self, stack: np.ndarray) -> float:
        return (2.0 * math.pi) ** self.dim * float(np.sum(np.abs(stack) ** 2))

    def _flux_sq(self, stack: np.ndarray, radius: int) -> float:
        """Σ_k ‖M_k u‖² somado sobre a pilha."""
        return self._norm_sq(self._advect_all(stack, radius))

    def estimate_cost(self, N: int, quad_order: int, extra_levels: int = 0) -> float:
        levels = N + extra_levels
        return float((quad_order * max(self.basis.n_modes, 1)) ** levels)

    def _check_budget(self, cost: float) -> None:
        if cost > self.budget:
            raise OracleBudgetExceeded(cost, self.budget)

    def white_noise_norm(self, N: int, t: float, quad_order: int) -> float:
        points, weights = simplex_rule(N, t, quad_order)

        def evaluate(index: int) -> float:
            stack, _ = self.chain(points[index], t)
            return weights[index] * self._norm_sq(stack)

        with WorkerPool(self.workers) as pool:
            values = pool.map(evaluate, range(len(weights)))
        return float(math.fsum(values))

    def white_noise_tail(self, N: int, t: float, quad_order: int) -> float:
        """F_N(t) = Σ_{k₁..k_{N+1}} ∫_{s₁<…<s_{N+1}<t} ‖M_{k_{N+1}}T_{s_{N+1}−s_N}…T_{s₁}θ₀‖²."""
        points, weights = simplex_rule(N + 1, t, quad_order)

        def evaluate(index: int) -> float:
            s = points[index]
            stack, radius = self.chain(s[:-1], s[-1])
            return weights[index] * self._flux_sq(stack, radius)

        with WorkerPool(self.workers) as pool:
            values = pool.map(evaluate, range(len(weights)))
        return float(math.fsum(values))

    def ordered_integrals(self, N: int, t: float, time_basis: TimeBasis, quad_order: int) -> Tuple[np.ndarray, int]:
        """I[i₁..i_N, k₁..k_N] = ∫_{simplexo} T_{t−s_N}m_{i_N}(s_N)M_{k_N}…m_{i₁}(s₁)M_{k₁}T_{s₁}θ₀ ds."""
        points, weights = simplex_rule(N, t, quad_order)
        n_t, n_w = time_basis.n_t, self.basis.n_modes
        radius = self.base + N * self.reach
        cube = (2 * radius + 1,) * self.dim

        def evaluate(chunk: range) -> np.ndarray:
            partial = np.zeros((n_t**N, n_w**N) + cube, dtype=complex)
            for index in chunk:
                s = points[index]
                stack, _ = self.chain(s, t)
                m = time_basis_values(time_basis, s)
                # produto externo m_{i₁}(s₁)…m_{i_N}(s_N) em ordem linha (i₁, …, i_N)
                outer = np.ones(1)
                for j in range(N):
                    outer = np.multiply.outer(outer, m[:, j]).reshape(-1)
                partial += weights[index] * np.multiply.outer(outer, stack)
            return partial

        chunks = [range(start, min(start + _POINT_CHUNK, len(weights))) for start in range(0, len(weights), _POINT_CHUNK)]
        total = np.zeros((n_t**N, n_w**N) + cube, dtype=complex)
        with WorkerPool(self.workers) as pool:
            for partial in pool.map(evaluate, chunks):
                total += partial
        return total, radius

    def finite_basis_norm(self, N: int, t: float, time_basis: TimeBasis, quad_order: int) -> float:
        """Σ_{|α|=N, i ≤ n_t} ‖θ_α(t)‖² pela representação em integrais múltiplas."""
        if N == 0:
            stack, _ = self.chain((), t)
            return self._norm_sq(stack)
        return self._norm_sq(self._finite_level(N, t, time_basis, quad_order))

    def _finite_level(self, N: int, t: float, time_basis: TimeBasis, quad_order: int) -> np.ndarray:
        n_t, n_w = time_basis.n_t, self.basis.n_modes
        index_set = ChaosIndexSet(n_t, n_w, N)
        if not index_set.levels[N]:
            return np.zeros((0,) + (2 * (self.base + N * self.reach) + 1,) * self.dim, dtype=complex)
        integrals, _ = self.ordered_integrals(N, t, time_basis, quad_order)
        level = []
        for alpha in index_set.levels[N]:
            cells = alpha.cell_sequence()
            field = 0
            for ordering in sorted(set(itertools.permutations(cells))):
                i_rank = np.ravel_multi_index([i - 1 for i, _ in ordering], (n_t,) * N)
                k_rank = np.ravel_multi_index([k - 1 for _, k in ordering], (n_w,) * N)
                field = field + integrals[i_rank, k_rank]
            level.append(math.sqrt(alpha.factorial()) * field)
        return np.stack(level)

    def finite_basis_tail(self, N: int, t: float, time_basis: TimeBasis, quad_order: int) -> float:
        """∫₀ᵗ Σ_{|α|=N} Σ_k ‖M_k θ_α(s)‖² ds com quadratura externa em s."""
        x, w = roots_legendre(quad_order)
        radius = self.base + N * self.reach
        total = []
        for node, weight in zip(0.5 * t * (x + 1.0), 0.5 * t * w):
            if N == 0:
                stack, _ = self.chain((), node)
            else:
                stack = self._finite_level(N, node, time_basis, quad_order)
            total.append(weight * self._flux_sq(stack, radius))
        return float(math.fsum(total))


def iterated_integral_level_norm(
    theta0: SpectralField,
    basis: VelocityBasis,
    nu: float,
    c0,
    N: int,
    t: float,
    quad_order: Optional[int] = None,
    time_basis: Optional[TimeBasis] = None,
    budget: Optional[float] = None,
    workers: Optional[int] = None,
) -> float:
    """Σ_{|α|=N}‖θ_α(t)‖²; sem time_basis usa o ruído branco, com time_basis soma apenas i ≤ n_t."""
    if N < 0:
        raise ValueError(f"N={N} violates N ≥ 0")
    if t < 0.0:
        raise ValueError(f"t={t} violates t ≥ 0")
    order = quad_order or default_quad_order(N)
    oracle = IteratedIntegralOracle(theta0, basis, nu, c0, workers=workers, budget=budget)
    oracle._check_budget(oracle.estimate_cost(N, order))
    logger.debug(f"Iterated-integral oracle: N={N}, t={t}, quad_order={order}")
    if time_basis is None:
        return oracle.white_noise_norm(N, t, order)
    return oracle.finite_basis_norm(N, t, time_basis, order)


def iterated_integral_tail(
    theta0: SpectralField,
    basis: VelocityBasis,
    nu: float,
    c0,
    N: int,
    t: float,
    quad_order: Optional[int] = None,
    time_basis: Optional[TimeBasis] = None,
    budget: Optional[float] = None,
    workers: Optional[int] = None,
) -> float:
    """F_N(t) pela integral iterada (N+1)-upla (caminho caro, N ≤ 2)."""
    if N < 0:
        raise ValueError(f"N={N} violates N ≥ 0")
    order = quad_order or default_quad_order(N + 1)
    oracle = IteratedIntegralOracle(theta0, basis, nu, c0, workers=workers, budget=budget)
    oracle._check_budget(oracle.estimate_cost(N, order, extra_levels=1))
    if time_basis is None:
        return oracle.white_noise_tail(N, t, order)
    return oracle.finite_basis_tail(N, t, time_basis, order)


def energy_balance_report(sol: ChaosSolution, basis: Optional[VelocityBasis] = None) -> EnergyReport:
    """Balanço E‖θ_N‖² + ν∫Σ‖∇θ_α‖² + F_N + defeito da base = ‖θ₀‖² nos instantes de saída."""
    if basis is not None and basis.leading(sol.config.n_w).modes != sol.basis.modes:
        raise ValueError("solution was not computed with the leading modes of this basis")
    ledger = sol.ledger
    N = sol.N
    steps = sol.config.output_steps()
    theta0_norm = sol.theta0.norm_sq()

    e_l2 = ledger["l2"].sum(axis=1)
    dissipation = sol.config.nu * ledger["int_grad"].sum(axis=1)
    tail = ledger["int_flux"][:, N]
    defect = np.zeros_like(tail)
    for n in range(1, N + 1):
        defect += ledger["int_flux"][:, n - 1] - ledger["int_transfer"][:, n]
    residual = e_l2 + dissipation + tail + defect - theta0_norm

    return EnergyReport(
        times=[float(ledger["times"][j]) for j in steps],
        e_l2=[float(e_l2[j]) for j in steps],
        dissipation=[float(dissipation[j]) for j in steps],
        tail=[float(tail[j]) for j in steps],
        basis_defect=[float(defect[j]) for j in steps],
        residual=[float(residual[j]) for j in steps],
        theta0_norm_sq=theta0_norm,
        level_norms={n: [float(ledger["l2"][j, n]) for j in steps] for n in range(N + 1)},
    )


def truncated_balance(sol: ChaosSolution, N: int, step: int = -1) -> Dict[str, float]:
    """Balanço do bloco |α| ≤ N extraído de uma solução de ordem maior (os níveis não dependem de N)."""
    if not 0 <= N <= sol.N:
        raise ValueError(f"N={N} outside 0..{sol.N}")
    ledger = sol.ledger
    e_l2 = float(ledger["l2"][step, : N + 1].sum())
    dissipation = sol.config.nu * float(ledger["int_grad"][step, : N + 1].sum())
    tail = float(ledger["int_flux"][step, N])
    defect = float(
        sum(ledger["int_flux"][step, n - 1] - ledger["int_transfer"][step, n] for n in range(1, N + 1))
    )
    theta0_norm = sol.theta0.norm_sq()
    return {
        "e_l2": e_l2,
        "dissipation": dissipation,
        "tail": tail,
        "basis_defect": defect,
        "deficit": theta0_norm - e_l2 - dissipation,
        "residual": e_l2 + dissipation + tail + defect - theta0_norm,
    }


def tail_decay_study(
    theta0: SpectralField,
    basis: VelocityBasis,
    cfg: PropagatorConfig,
    N_max: int,
    grid: Optional[GridSpec] = None,
    workers: Optional[int] = None,
    solution: Optional[ChaosSolution] = None,
) -> List[TailPoint]:
    """F_N(T) para N = 0..N_max a partir de uma única propagação de ordem N_max."""
    if N_max < 0:
        raise ValueError(f"N_max={N_max} violates N_max ≥ 0")
    if cfg.nu == 0.0:
        logger.warning("tail_decay_study with nu = 0: no decay of F_N is guaranteed, values are reported only")
    sol = solution if solution is not None else solve_propagator(
        theta0, basis, cfg.with_updates(N=N_max), grid=grid, workers=workers
    )
    if sol.N < N_max:
        raise ValueError(f"solution has order {sol.N} < N_max={N_max}")
    points = []
    previous = None
    for N in range(N_max + 1):
        balance = truncated_balance(sol, N)
        ratio = balance["tail"] / previous if previous else None
        points.append(TailPoint(N=N, tail=balance["tail"], ratio=ratio, partial_sum_gap=balance["residual"]))
        previous = balance["tail"]
    return points
