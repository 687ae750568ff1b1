"""
Solver direto de Monte Carlo da equação de Ito

    dθ = Aθ dt + s·Σ_k M_kθ dw_k      (s = sinal de ruído da convenção de Hermite)

por Euler–Maruyama no referencial de interação, numa grade de Galerkin fixa.
Os incrementos de w_k são os de `brownian_from_sample` (mesmas coordenadas ξ_ik
do caos) mais um resíduo gaussiano independente de ξ com a covariância condicional
exata dt·I − UUᵀ (U = incrementos dos modos temporais retidos).
"""

import logging
import math
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from ..config import get_settings
from ..exceptions import NonFiniteFieldError
from ..models.chaos_model import GaussianSample, TimeBasis
from ..models.grid_model import GridSpec
from ..models.propagator_model import PropagatorConfig
from ..models.report_model import McEstimate
from ..models.velocity_model import VelocityBasis
from ..tools.chaos_basis import brownian_increment_matrix
from ..tools.parallel import WorkerPool
from ..tools.spectral_field import SpectralField, resize
from ..tools.velocity_basis import AdvectionOperator, covariance_at_zero
from .propagator import ChaosSolution, generator_symbol, reconstruct

# Tolerância relativa para T ser múltiplo inteiro de dt_mc
_GRID_MATCH = 1e-9


class DirectMonteCarloSolver:
    def __init__(
        self,
        theta0: SpectralField,
        basis: VelocityBasis,
        cfg: PropagatorConfig,
        dt_mc: float,
        galerkin_radius: Optional[int] = None,
        grid: Optional[GridSpec] = None,
        workers: Optional[int] = None,
        chunk_size: Optional[int] = None,
        show_progress: Optional[bool] = None,
    ):
        self.settings = get_settings()
        self.logger = logging.getLogger(__name__)
        if dt_mc <= 0.0:
            raise ValueError(f"dt_mc={dt_mc} violates dt_mc > 0")
        ratio = cfg.T / dt_mc
        if abs(ratio - round(ratio)) > _GRID_MATCH * max(1.0, ratio):
            raise ValueError(f"T={cfg.T} is not an integer multiple of dt_mc={dt_mc}")
        if cfg.n_w > basis.n_modes:
            raise ValueError(f"n_w={cfg.n_w} exceeds the {basis.n_modes} modes of the basis")

        self.cfg = cfg
        self.dt_mc = dt_mc
        self.n_steps = int(round(ratio))
        self.basis = basis.leading(cfg.n_w)
        self.workers = workers
        self.chunk_size = chunk_size or self.settings.mc_chunk_size
        self.show_progress = self.settings.show_progress if show_progress is None else show_progress
        self.sign = cfg.hermite.noise_sign
        self.dim = theta0.dim

        if galerkin_radius is None:
            galerkin_radius = grid.growth_cap if grid is not None else (
                theta0.support_radius + cfg.N * self.basis.reach
            )
        if grid is not None:
            grid.check_radius(galerkin_radius)
        if theta0.effective_radius() > galerkin_radius:
            raise ValueError("theta0 does not fit the Galerkin grid")
        self.radius = galerkin_radius

        self.c0_matrix, self.c0 = covariance_at_zero(self.basis)
        self.generator = generator_symbol(self.dim, self.radius, cfg.nu, self.c0_matrix)
        self.propagator_factor = np.exp(dt_mc * self.generator)
        self.x0 = resize(theta0.data, self.dim, theta0.support_radius, self.radius)
        self.operator = AdvectionOperator(self.basis)

        self.output_steps = []
        for t in cfg.output_times:
            step = int(round(t / dt_mc))
            if abs(step * dt_mc - t) > 0.5 * dt_mc:
                raise ValueError(f"output time {t} cannot be snapped to the dt_mc grid")
            self.output_steps.append(min(step, self.n_steps))
        self.output_times = [step * dt_mc for step in self.output_steps]

        self.time_basis = TimeBasis(T=cfg.T, n_t=cfg.n_t)
        self.coarse = brownian_increment_matrix(self.time_basis, dt_mc * np.arange(self.n_steps + 1))
        self.retained, triangle = np.linalg.qr(self.coarse)
        # Condicional a ξ, Δw tem covariância dt·I − UUᵀ = dt(I − QQᵀ) + Q(dt·I − RRᵀ)Qᵀ
        rank = triangle.shape[0]
        eigenvalues, vectors = np.linalg.eigh(dt_mc * np.eye(rank) - triangle @ triangle.T)
        root = (vectors * np.sqrt(np.clip(eigenvalues, 0.0, None))) @ vectors.T
        self.residual_correction = root - math.sqrt(dt_mc) * np.eye(rank)

    def increments(self, sample: GaussianSample) -> np.ndarray:
        """Δw_k por passo; forma (n_steps, n_w)."""
        cfg = self.cfg
        if sample.n_t < cfg.n_t or sample.n_w < cfg.n_w:
            raise ValueError(f"sample of shape {sample.xi.shape} does not cover (n_t={cfg.n_t}, n_w={cfg.n_w})")
        xi = sample.xi[: cfg.n_t, : cfg.n_w]
        normals = sample.residual_rng().standard_normal((self.n_steps, cfg.n_w))
        return self.coarse @ xi + self.residual(normals)

    def residual(self, normals: np.ndarray) -> np.ndarray:
        """Parte de Δw não explicada pelos ξ_ik retidos; normals são N(0, 1) ao longo do eixo 0."""
        correction = self.retained @ (self.residual_correction @ (self.retained.T @ normals))
        return math.sqrt(self.dt_mc) * normals + correction

    def _integrate(self, samples: Sequence[GaussianSample], phi: Optional[SpectralField] = None) -> Dict[str, np.ndarray]:
        """Avança um lote de trajetórias; devolve snapshots e, com phi, o resíduo da forma fraca."""
        n_paths = len(samples)
        scale = (2.0 * math.pi) ** self.dim
        trailing = tuple(range(-self.dim, 0))
        expand = (slice(None),) + (None,) * self.dim
        dw = np.stack([self.increments(sample) for sample in samples]) if n_paths else np.zeros((0, self.n_steps, 0))
        state = np.broadcast_to(self.x0, (n_paths,) + self.x0.shape).astype(complex)
        snapshots = np.zeros((n_paths, len(self.output_steps)) + self.x0.shape, dtype=complex)
        weak = np.zeros((n_paths, len(self.output_steps)))

        if phi is not None:
            phi_data = phi.with_radius(self.radius, allow_projection=True).data
            a_phi = self.generator * phi_data
            m_phi = [self.operator.apply_array(k, phi_data, self.radius, self.radius) for k in range(self.cfg.n_w)]
            start = scale * np.sum(state * np.conj(phi_data), axis=trailing).real
            drift_integral = np.zeros(n_paths)
            noise_integral = np.zeros(n_paths)

        def store(step: int) -> None:
            for position, target in enumerate(self.output_steps):
                if target == step:
                    snapshots[:, position] = state
                    if phi is not None:
                        current = scale * np.sum(state * np.conj(phi_data), axis=trailing).real
                        weak[:, position] = current - start - drift_integral + self.sign * noise_integral

        store(0)
        for step in range(self.n_steps):
            if phi is not None:
                drift_integral += self.dt_mc * scale * np.sum(state * np.conj(a_phi), axis=trailing).real
                for k in range(self.cfg.n_w):
                    pairing = scale * np.sum(state * np.conj(m_phi[k]), axis=trailing).real
                    noise_integral += dw[:, step, k] * pairing
            update = state.copy()
            for k in range(self.cfg.n_w):
                advected = self.operator.apply_array(k, state, self.radius, self.radius)
                update += self.sign * dw[:, step, k][expand] * advected
            state = self.propagator_factor * update
            store(step + 1)

        if not np.all(np.isfinite(snapshots)):
            bad = np.argwhere(~np.isfinite(snapshots))[0]
            wavevector = [int(j) - self.radius for j in bad[2:]]
            raise NonFiniteFieldError(0, self.output_times[int(bad[1])], wavevector)
        return {"snapshots": snapshots, "weak": weak}

    def solve_path(self, sample: GaussianSample) -> List[SpectralField]:
        snapshots = self._integrate([sample])["snapshots"][0]
        return [SpectralField(s, self.dim, self.radius) for s in snapshots]

    def weak_form_residual(self, sample: GaussianSample, phi: SpectralField) -> List[float]:
        return [float(v) for v in self._integrate([sample], phi)["weak"][0]]

    def _chunks(self, n_paths: int) -> List[range]:
        size = self.chunk_size
        return [range(start, min(start + size, n_paths)) for start in range(0, n_paths, size)]

    def final_states(self, n_paths: int, master_seed: int) -> np.ndarray:
        """θ no último instante de saída por trajetória; a trajetória p usa a semente (master_seed, p)."""

        def run(chunk: range) -> np.ndarray:
            samples = [GaussianSample.draw(self.cfg.n_t, self.cfg.n_w, master_seed, p) for p in chunk]
            return self._integrate(samples)["snapshots"][:, -1]

        chunks = self._chunks(n_paths)
        with WorkerPool(self.workers) as pool:
            if pool.workers == 1:
                results = [run(c) for c in tqdm(chunks, desc="monte carlo", disable=not self.show_progress, leave=False)]
            else:
                results = pool.map(run, chunks)
        if not results:
            return np.zeros((0,) + self.x0.shape, dtype=complex)
        return np.concatenate(results)

    def final_energies(self, n_paths: int, master_seed: int) -> np.ndarray:
        """‖θ(T)‖² por trajetória."""
        finals = self.final_states(n_paths, master_seed)
        trailing = tuple(range(-self.dim, 0))
        return (2.0 * math.pi) ** self.dim * np.sum(np.abs(finals) ** 2, axis=trailing)

    def second_moment(self, n_paths: int, master_seed: int) -> McEstimate:
        if n_paths < 2:
            raise ValueError("a Monte Carlo estimate needs n_paths ≥ 2")
        values = self.final_energies(n_paths, master_seed)
        estimate = McEstimate(
            estimator="second_moment_l2",
            n_paths=n_paths,
            dt_mc=self.dt_mc,
            value=float(np.mean(values)),
            std_error=float(np.std(values, ddof=1) / math.sqrt(n_paths)),
        )
        self.logger.info(
            f"Monte Carlo E‖θ(T)‖² = {estimate.value:.10g} ± {estimate.std_error:.3g} "
            f"({n_paths} paths, dt_mc={self.dt_mc:.6g})"
        )
        return estimate


def direct_mc_solve(
    theta0: SpectralField,
    basis: VelocityBasis,
    cfg: PropagatorConfig,
    sample: GaussianSample,
    dt_mc: float,
    galerkin_radius: Optional[int] = None,
    grid: Optional[GridSpec] = None,
) -> List[SpectralField]:
    """Trajetória θ(t) nos instantes de saída para uma amostra compartilhada com o caos."""
    solver = DirectMonteCarloSolver(theta0, basis, cfg, dt_mc, galerkin_radius=galerkin_radius, grid=grid)
    return solver.solve_path(sample)


def weak_form_residual(
    theta0: SpectralField,
    basis: VelocityBasis,
    cfg: PropagatorConfig,
    sample: GaussianSample,
    dt_mc: float,
    phi: SpectralField,
    galerkin_radius: Optional[int] = None,
) -> List[float]:
    """(θ,φ)(t) − (θ₀,φ) − ∫(θ,Aφ)ds + s·Σ_k∫(θ,M_kφ)dw_k nos instantes de saída."""
    solver = DirectMonteCarloSolver(theta0, basis, cfg, dt_mc, galerkin_radius=galerkin_radius)
    return solver.weak_form_residual(sample, phi)


def paired_final_gaps(
    driver: ChaosSolution,
    targets: Dict[Hashable, Tuple[ChaosSolution, int]],
    dt_mc: float,
    n_paths: int,
    master_seed: int,
    galerkin_radius: Optional[int] = None,
    grid: Optional[GridSpec] = None,
    workers: Optional[int] = None,
) -> Dict[Hashable, List[float]]:
    """
    ‖θ_MC(T) − θ_N(T)‖ por trajetória para cada alvo (solução, N).

    O Monte Carlo roda uma vez, acoplado às coordenadas (n_t, n_w) de `driver`;
    alvos com n_t menor reconstroem com a amostra truncada.
    """
    cfg = driver.config
    for key, (sol, N) in targets.items():
        if not 0 <= N <= sol.N:
            raise ValueError(f"target {key}: order {N} outside 0..{sol.N}")
        other = sol.config
        if other.n_t > cfg.n_t or other.n_w != cfg.n_w or other.T != cfg.T:
            raise ValueError(f"target {key} is not driven by the (n_t={cfg.n_t}, n_w={cfg.n_w}) noise")
    solver = DirectMonteCarloSolver(
        driver.theta0, driver.basis, cfg, dt_mc, galerkin_radius=galerkin_radius, grid=grid, workers=workers
    )
    finals = solver.final_states(n_paths, master_seed)
    gaps: Dict[Hashable, List[float]] = {key: [] for key in targets}
    for p in range(n_paths):
        sample = GaussianSample.draw(cfg.n_t, cfg.n_w, master_seed, p)
        mc_final = SpectralField(finals[p], solver.dim, solver.radius)
        for key, (sol, N) in targets.items():
            gap = mc_final - reconstruct(sol, sample, sol.times[-1], max_level=N)
            gaps[key].append(math.sqrt(max(gap.norm_sq(), 0.0)))
    return gaps


def pathwise_errors(
    sol: ChaosSolution,
    dt_mc: float,
    n_paths: int,
    master_seed: int,
    orders: Optional[Sequence[int]] = None,
    galerkin_radius: Optional[int] = None,
    grid: Optional[GridSpec] = None,
    workers: Optional[int] = None,
) -> Dict[int, List[float]]:
    """‖θ_MC(T) − θ_N(T)‖ por trajetória, com a mesma amostra nos dois lados, para cada ordem N."""
    chosen = sorted(set(orders)) if orders is not None else list(range(1, sol.N + 1))
    if any(not 0 <= N <= sol.N for N in chosen):
        raise ValueError(f"pathwise orders {chosen} must lie in 0..{sol.N}")
    return paired_final_gaps(
        sol, {N: (sol, N) for N in chosen}, dt_mc, n_paths, master_seed,
        galerkin_radius=galerkin_radius, grid=grid, workers=workers,
    )
