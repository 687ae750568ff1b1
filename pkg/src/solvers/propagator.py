"""
Propagador do caos de Wiener.

Resolve o sistema triangular inferior

    dθ_α/dt = Aθ_α + Σ_{i,k} √α_ik · m_i(t) · M_k θ_{α⁻(i,k)},   θ_α(0) = θ₀·1{|α|=0}

com todos os níveis avançando juntos por Runge–Kutta de quarta ordem no
referencial de interação (fatores exatos do semigrupo, RK4 na forçante).
O nível n só lê o nível n−1, vive na grade de raio K₀ + n·R e guarda apenas
os instantes de saída; o balanço de energia por passo fica no ledger.
"""

import logging
import math
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from tqdm import tqdm

from ..config import get_settings
from ..exceptions import NonFiniteFieldError
from ..models.chaos_model import GaussianSample, MultiIndex, TimeBasis
from ..models.grid_model import GridSpec
from ..models.propagator_model import PropagatorConfig
from ..models.velocity_model import VelocityBasis
from ..tools.chaos_basis import ChaosIndexSet, time_basis_values, xi_alpha_batch
from ..tools.parallel import WorkerPool
from ..tools.spectral_field import SpectralField, lattice, resize, squared_norm
from ..tools.velocity_basis import AdvectionOperator, covariance_at_zero

C0Like = Union[float, np.ndarray]


def _c0_matrix(dim: int, c0: C0Like) -> np.ndarray:
    if np.ndim(c0) == 0:
        if float(c0) < 0.0:
            raise ValueError(f"c0={c0} violates c0 ≥ 0")
        return float(c0) * np.eye(dim)
    matrix = np.asarray(c0, dtype=float)
    if matrix.shape != (dim, dim):
        raise ValueError(f"C(0) must be a {dim}×{dim} matrix")
    if np.min(np.linalg.eigvalsh(0.5 * (matrix + matrix.T))) < -1e-14:
        raise ValueError("C(0) must be positive semidefinite")
    return matrix


def quadratic_symbol(dim: int, radius: int, c0: C0Like) -> np.ndarray:
    """zᵀC(0)z no cubo de raio dado."""
    matrix = _c0_matrix(dim, c0)
    z = lattice(dim, radius)
    return sum(matrix[a, b] * z[a] * z[b] for a in range(dim) for b in range(dim))


def generator_symbol(dim: int, radius: int, nu: float, c0: C0Like) -> np.ndarray:
    """Multiplicador de A = ½(νΔ + C^{ij}(0)D_iD_j): −½(ν|z|² + zᵀC(0)z)."""
    if nu < 0.0:
        raise ValueError(f"nu={nu} violates ν ≥ 0")
    return -0.5 * (nu * squared_norm(dim, radius) + quadratic_symbol(dim, radius, c0))


def apply_A(f: SpectralField, nu: float, c0: C0Like) -> SpectralField:
    symbol = generator_symbol(f.dim, f.support_radius, nu, c0)
    return SpectralField(symbol * f.data, f.dim, f.support_radius, check=False)


class ChaosSolution:
    """θ_α nos instantes de saída, mais o ledger de energia por passo."""

    def __init__(
        self,
        config: PropagatorConfig,
        basis: VelocityBasis,
        theta0: SpectralField,
        index_set: ChaosIndexSet,
        radii: List[int],
        c0_matrix: np.ndarray,
        snapshots: List[np.ndarray],
        ledger: Dict[str, np.ndarray],
    ):
        self.config = config
        self.basis = basis
        self.theta0 = theta0
        self.index_set = index_set
        self.radii = radii
        self.c0_matrix = c0_matrix
        self.c0 = float(np.trace(c0_matrix)) / theta0.dim
        self.times = config.snapped_times()
        self._snapshots = snapshots
        self.ledger = ledger
        for array in snapshots:
            array.flags.writeable = False

    @property
    def dim(self) -> int:
        return self.theta0.dim

    @property
    def N(self) -> int:
        return self.config.N

    def time_index(self, t: float) -> int:
        position = self.config.time_index(t)
        if position is None:
            raise ValueError(f"t={t} is not an output time {self.times}")
        return position

    def level_array(self, n: int, t: float) -> np.ndarray:
        """Coeficientes do nível n em t; forma (count_n, cubo_n)."""
        return self._snapshots[n][self.time_index(t)]

    def coefficient(self, alpha: MultiIndex, t: float) -> SpectralField:
        n, position = self.index_set.locate(alpha)
        return SpectralField(self._snapshots[n][self.time_index(t), position], self.dim, self.radii[n])

    def series(self, alpha: MultiIndex) -> List[SpectralField]:
        return [self.coefficient(alpha, t) for t in self.times]

    @property
    def coeffs(self) -> Dict[MultiIndex, List[SpectralField]]:
        return {alpha: self.series(alpha) for alpha in self.index_set.all()}

    def mean(self, t: float) -> SpectralField:
        return self.coefficient(MultiIndex.zero(), t)

    def level_norms(self, t: float) -> List[float]:
        """Σ_{|α|=n}‖θ_α(t)‖² para n = 0..N."""
        scale = (2.0 * math.pi) ** self.dim
        return [scale * float(np.sum(np.abs(self.level_array(n, t)) ** 2)) for n in range(self.N + 1)]

    def level_grad_norms(self, t: float) -> List[float]:
        scale = (2.0 * math.pi) ** self.dim
        return [
            scale * float(np.sum(squared_norm(self.dim, self.radii[n]) * np.abs(self.level_array(n, t)) ** 2))
            for n in range(self.N + 1)
        ]

    def coefficient_rows(self, max_level: Optional[int] = None) -> List[list]:
        """Linhas (rank, t, z..., re, im) dos coeficientes não nulos, na ordem graduada."""
        top = self.N if max_level is None else min(max_level, self.N)
        rows = []
        for n in range(top + 1):
            radius = self.radii[n]
            for position, alpha in enumerate(self.index_set.levels[n]):
                rank = self.index_set.rank(alpha)
                for t_index, t in enumerate(self.times):
                    data = self._snapshots[n][t_index, position]
                    for index in zip(*np.nonzero(data)):
                        value = data[index]
                        rows.append([rank, t, *(int(j) - radius for j in index), value.real, value.imag])
        return rows


class ChaosPropagator:
    def __init__(
        self,
        basis: VelocityBasis,
        config: PropagatorConfig,
        grid: Optional[GridSpec] = None,
        workers: Optional[int] = None,
        show_progress: Optional[bool] = None,
    ):
        self.settings = get_settings()
        self.logger = logging.getLogger(__name__)
        if config.n_w > basis.n_modes:
            raise ValueError(f"n_w={config.n_w} exceeds the {basis.n_modes} modes of the basis")
        self.config = config
        self.basis = basis.leading(config.n_w)
        self.grid = grid
        self.workers = workers
        self.show_progress = self.settings.show_progress if show_progress is None else show_progress
        self.c0_matrix, self.c0 = covariance_at_zero(self.basis)
        self.time_basis = TimeBasis(T=config.T, n_t=config.n_t)
        self.index_set = ChaosIndexSet(config.n_t, config.n_w, config.N)
        self.operator = AdvectionOperator(self.basis, grid)

    def _radii(self, theta0: SpectralField) -> List[int]:
        base = self.grid.base_radius if self.grid is not None else theta0.support_radius
        if theta0.effective_radius() > base:
            raise ValueError(f"theta0 support {theta0.effective_radius()} exceeds base_radius {base}")
        reach = self.basis.reach
        radii = [base + n * reach for n in range(self.config.N + 1)]
        if self.grid is not None:
            self.grid.check_radius(radii[-1])
        return radii

    def solve(self, theta0: SpectralField) -> ChaosSolution:
        if theta0.dim != self.basis.dim:
            raise ValueError(f"theta0 has dim {theta0.dim}, basis has dim {self.basis.dim}")
        if not theta0.is_real():
            raise ValueError("theta0 violates the reality constraint")

        cfg = self.config
        dim = theta0.dim
        radii = self._radii(theta0)
        sizes = [self.index_set.level_size(n) for n in range(cfg.N + 1)]

        generators = [generator_symbol(dim, r, cfg.nu, self.c0_matrix) for r in radii]
        full_step = [np.exp(cfg.dt * g) for g in generators]
        half_step = [np.exp(0.5 * cfg.dt * g) for g in generators]
        grad_weights = [squared_norm(dim, r) for r in radii]
        flux_weights = [quadratic_symbol(dim, r, self.c0_matrix) for r in radii]

        state = [np.zeros((sizes[n],) + (2 * radii[n] + 1,) * dim, dtype=complex) for n in range(cfg.N + 1)]
        state[0][0] = resize(theta0.data, dim, theta0.support_radius, radii[0])

        n_steps = cfg.n_steps
        output_steps = cfg.output_steps()
        snapshots = [np.zeros((len(output_steps),) + s.shape, dtype=complex) for s in state]
        ledger = {
            name: np.zeros((n_steps + 1, cfg.N + 1))
            for name in ("l2", "grad", "flux", "transfer", "int_grad", "int_flux", "int_transfer")
        }
        ledger["times"] = cfg.dt * np.arange(n_steps + 1)
        scale = (2.0 * math.pi) ** dim

        self.logger.info(
            f"Propagating {len(self.index_set)} chaos coefficients "
            f"(N={cfg.N}, n_t={cfg.n_t}, n_w={cfg.n_w}) over {n_steps} steps"
        )

        def rates(current: List[np.ndarray], forcing: List[np.ndarray]) -> np.ndarray:
            """(G_n, S_n, X_n) por nível; forma (3, N+1)."""
            out = np.zeros((3, cfg.N + 1))
            for n in range(cfg.N + 1):
                power = np.abs(current[n]) ** 2
                out[0, n] = scale * float(np.sum(grad_weights[n] * power))
                out[1, n] = scale * float(np.sum(flux_weights[n] * power))
                out[2, n] = 2.0 * scale * float(np.sum(forcing[n] * np.conj(current[n])).real)
            return out

        def record(step: int, current: List[np.ndarray], pointwise: np.ndarray) -> None:
            for n in range(cfg.N + 1):
                ledger["l2"][step, n] = scale * float(np.sum(np.abs(current[n]) ** 2))
            ledger["grad"][step], ledger["flux"][step], ledger["transfer"][step] = pointwise
            if not (np.all(np.isfinite(ledger["l2"][step])) and np.all(np.isfinite(pointwise))):
                self._raise_non_finite(current, radii, step * cfg.dt)
            if step in output_steps:
                position = output_steps.index(step)
                for n in range(cfg.N + 1):
                    snapshots[n][position] = current[n]

        with WorkerPool(self.workers) as pool:
            dt = cfg.dt
            progress = tqdm(range(n_steps), desc="propagator", disable=not self.show_progress, leave=False)
            for step in progress:
                t = step * dt
                k1 = self._forcing(pool, t, state, radii)
                g1 = rates(state, k1)
                record(step, state, g1)
                stage = [half_step[n] * (state[n] + 0.5 * dt * k1[n]) for n in range(cfg.N + 1)]
                k2 = self._forcing(pool, t + 0.5 * dt, stage, radii)
                g2 = rates(stage, k2)
                stage = [half_step[n] * state[n] + 0.5 * dt * k2[n] for n in range(cfg.N + 1)]
                k3 = self._forcing(pool, t + 0.5 * dt, stage, radii)
                g3 = rates(stage, k3)
                stage = [full_step[n] * state[n] + dt * half_step[n] * k3[n] for n in range(cfg.N + 1)]
                k4 = self._forcing(pool, t + dt, stage, radii)
                g4 = rates(stage, k4)
                state = [
                    full_step[n] * state[n]
                    + (dt / 6.0) * (full_step[n] * k1[n] + 2.0 * half_step[n] * (k2[n] + k3[n]) + k4[n])
                    for n in range(cfg.N + 1)
                ]
                # integrais do ledger com os mesmos pesos do RK4
                increment = (dt / 6.0) * (g1 + 2.0 * g2 + 2.0 * g3 + g4)
                for row, name in enumerate(("int_grad", "int_flux", "int_transfer")):
                    ledger[name][step + 1] = ledger[name][step] + increment[row]
            final = self._forcing(pool, n_steps * dt, state, radii)
            record(n_steps, state, rates(state, final))

        self.logger.info(f"Propagation finished; E‖θ_N(T)‖² = {float(np.sum(ledger['l2'][-1])):.12g}")
        return ChaosSolution(
            config=cfg,
            basis=self.basis,
            theta0=theta0,
            index_set=self.index_set,
            radii=radii,
            c0_matrix=self.c0_matrix,
            snapshots=snapshots,
            ledger=ledger,
        )

    def _forcing(
        self, pool: WorkerPool, t: float, state: List[np.ndarray], radii: List[int]
    ) -> List[np.ndarray]:
        """F_n(t) = Σ_slots √α_ik·m_i(t)·M_k θ_{α⁻(i,k)} para cada nível."""
        forcing = [np.zeros_like(level) for level in state]
        N = self.config.N
        tasks = [(n, k) for n in range(1, N + 1) if state[n].shape[0] for k in range(self.config.n_w)]
        if not tasks:
            return forcing

        m = time_basis_values(self.time_basis, min(t, self.config.T))
        advected = pool.map(
            lambda task: self.operator.apply_array(task[1], state[task[0] - 1], radii[task[0] - 1], radii[task[0]]),
            tasks,
        )
        by_level: Dict[int, List[np.ndarray]] = {}
        for (n, _), array in zip(tasks, advected):
            by_level.setdefault(n, []).append(array)

        for n, arrays in by_level.items():
            stacked = np.stack(arrays)  # (n_w, count_{n−1}, cubo_n)
            slots = self.index_set.slots(n)
            expand = (slice(None),) + (None,) * self.basis.dim
            for s in range(n):
                coefficient = slots["weight"][s] * m[slots["time_mode"][s]]
                forcing[n] += coefficient[expand] * stacked[slots["noise"][s], slots["parent"][s]]
        return forcing

    def _raise_non_finite(self, state: List[np.ndarray], radii: List[int], t: float) -> None:
        for n, level in enumerate(state):
            bad = np.argwhere(~np.isfinite(level))
            if bad.size:
                position, *index = bad[0]
                alpha = self.index_set.levels[n][int(position)]
                wavevector = [int(j) - radii[n] for j in index]
                raise NonFiniteFieldError(self.index_set.rank(alpha), t, wavevector)
        raise NonFiniteFieldError(-1, t, [])


def solve_propagator(
    theta0: SpectralField,
    basis: VelocityBasis,
    cfg: PropagatorConfig,
    grid: Optional[GridSpec] = None,
    workers: Optional[int] = None,
    show_progress: Optional[bool] = None,
) -> ChaosSolution:
    return ChaosPropagator(basis, cfg, grid=grid, workers=workers, show_progress=show_progress).solve(theta0)


def reconstruct(sol: ChaosSolution, sample: GaussianSample, t: float, max_level: Optional[int] = None) -> SpectralField:
    """θ_N(t) = Σ_{|α|≤N} θ_α(t)·ξ_α(amostra); max_level trunca em N < sol.N."""
    cfg = sol.config
    t_index = sol.time_index(t)
    if sample.n_t < cfg.n_t or sample.n_w < cfg.n_w:
        raise ValueError(f"sample of shape {sample.xi.shape} does not cover (n_t={cfg.n_t}, n_w={cfg.n_w})")
    xi = sample.xi[: cfg.n_t, : cfg.n_w]
    last = sol.N if max_level is None else max_level
    if not 0 <= last <= sol.N:
        raise ValueError(f"max_level={max_level} outside 0..{sol.N}")
    top = sol.radii[last]
    total = np.zeros((2 * top + 1,) * sol.dim, dtype=complex)
    for n in range(last + 1):
        alphas = sol.index_set.levels[n]
        if not alphas:
            continue
        weights = xi_alpha_batch(alphas, xi, cfg.hermite)[0]
        level = np.tensordot(weights, sol._snapshots[n][t_index], axes=1)
        total += resize(level, sol.dim, sol.radii[n], top)
    return SpectralField(total, sol.dim, top)


def chaos_moments(sol: ChaosSolution, t: float) -> Tuple[SpectralField, float, float]:
    """(média, E‖θ_N‖², E‖∇θ_N‖²) em t."""
    return sol.mean(t), float(sum(sol.level_norms(t))), float(sum(sol.level_grad_norms(t)))
