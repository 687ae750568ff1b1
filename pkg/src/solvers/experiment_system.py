import logging
import math
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy.stats import linregress

from ..config import get_settings
from ..exceptions import ConfigError, InvariantBreach, OracleBudgetExceeded, UnsupportedRegimeError
from ..models import (
    ExperimentConfig,
    ExperimentKind,
    GaussianSample,
    GridSpec,
    PropagatorConfig,
    RunManifest,
    TimeBasis,
    half_lattice_mode_count,
)
from ..tools.chaos_basis import time_basis_antiderivatives
from ..tools.csv_tool import ResultWriter
from ..tools.initial_conditions import build_initial_condition, random_band_field
from ..tools.spectral_field import reality_defect
from ..tools.velocity_basis import (
    advection_energy,
    basis_rows,
    build_divergence_free_basis,
    covariance_at_zero,
    kernel_sum,
    truncated_covariance,
)
from .monte_carlo import DirectMonteCarloSolver, paired_final_gaps
from .oracles import energy_balance_report, iterated_integral_level_norm, tail_decay_study, truncated_balance
from .propagator import ChaosSolution, chaos_moments, reconstruct, solve_propagator

# Tolerâncias das verificações que não dependem do integrador
ROUNDOFF = 1e-12
IDENTITY_TOLERANCE = 1e-10
ORACLE_TOLERANCE = {0: 1e-12, 1: 1e-8}
DEFAULT_ORACLE_TOLERANCE = 1e-6
MIN_TIME_ORDER = 3.5

PLANNED_FILES: Dict[ExperimentKind, List[str]] = {
    ExperimentKind.VALIDATE_BASIS: ["basis.csv", "checks.csv"],
    ExperimentKind.PROPAGATE: ["coefficients.csv", "moments.csv", "sample.csv", "reconstruction.csv", "checks.csv"],
    ExperimentKind.ENERGY: ["energy.csv", "tail_decay.csv", "oracle.csv", "checks.csv"],
    ExperimentKind.COMPARE_MC: [
        "mc_estimate.csv",
        "pathwise.csv",
        "pathwise_summary.csv",
        "noise_coupling.csv",
        "checks.csv",
    ],
    ExperimentKind.CONVERGENCE: [
        "convergence_N.csv",
        "convergence_R.csv",
        "convergence_nt.csv",
        "convergence_dt.csv",
        "checks.csv",
    ],
}


class ExperimentSystem:
    """
    Orquestrador dos estudos do chaos-transport.

    Cada execução:
    1. Monta a base de velocidade, a grade e θ₀ a partir do ExperimentConfig
    2. Escreve o manifest.json com os arquivos previstos
    3. Executa o estudo pedido e escreve os CSVs
    4. Verifica os invariantes e fecha o manifest (passed | breached | failed)
    """

    def __init__(
        self,
        config: ExperimentConfig,
        workers: Optional[int] = None,
        show_progress: Optional[bool] = None,
    ):
        self.settings = get_settings()
        self.logger = logging.getLogger(__name__)
        self.config = config
        self.workers = workers if workers is not None else self.settings.max_workers
        self.show_progress = self.settings.show_progress if show_progress is None else show_progress
        self.tolerance = self.settings.energy_tolerance

        try:
            self.basis = build_divergence_free_basis(config.covariance, config.shell_radius)
        except UnsupportedRegimeError as e:
            raise ConfigError(str(e), "covariance.a") from e
        self.active_basis = self.basis.leading(config.propagator.n_w)
        self.c0_matrix, self.c0 = covariance_at_zero(self.active_basis)
        self.theta0 = build_initial_condition(config.initial_condition, config.dim, config.grid.base_radius)

        self.checks: List[List[Any]] = []
        self.breaches: List[str] = []
        self.writer: Optional[ResultWriter] = None

    # Cabeçalho comum dos CSVs; sem carimbo de tempo para manter os arquivos estáveis
    def _header(self) -> Dict[str, Any]:
        cfg = self.config
        return {
            "kind": cfg.kind.value,
            "dim": cfg.dim,
            "shell_radius": cfg.shell_radius,
            "alpha_spec": cfg.covariance.alpha_spec,
            "nu": cfg.propagator.nu,
            "c0": self.c0,
            "N": cfg.propagator.N,
            "n_t": cfg.propagator.n_t,
            "n_w": cfg.propagator.n_w,
            "dt": cfg.propagator.dt,
            "T": cfg.propagator.T,
            "hermite": cfg.propagator.hermite.value,
            "noise_sign": cfg.propagator.hermite.noise_sign,
            "master_seed": cfg.master_seed,
            "code_version": self.settings.system_version,
        }

    def _manifest(self) -> RunManifest:
        return RunManifest(
            config=self.config.echo(),
            code_version=self.settings.system_version,
            hermite_convention=self.config.propagator.hermite.value,
            noise_sign=self.config.propagator.hermite.noise_sign,
            settings=self.settings.get_summary(),
            planned_files=["manifest.json", *PLANNED_FILES[self.config.kind]],
        )

    def check(self, name: str, value: float, tolerance: float, passed: bool) -> bool:
        """Registra uma verificação; as falhas viram breaches do manifest."""
        self.checks.append([name, value, tolerance, bool(passed)])
        if passed:
            self.logger.debug(f"Check passed: {name} (value={value:.3g}, tolerance={tolerance:.3g})")
        else:
            self.breaches.append(name)
            self.logger.error(f"Invariant breached: {name} (value={value:.6g}, tolerance={tolerance:.3g})")
        return bool(passed)

    def run_experiment(self, out_dir: Optional[str] = None) -> RunManifest:
        """
        Executa o estudo configurado.

        Args:
            out_dir: Diretório de saída (padrão config.out_dir)

        Returns:
            RunManifest fechado com status "passed"

        Raises:
            InvariantBreach: algum invariante falhou (os arquivos são escritos antes)
        """
        kind = self.config.kind
        self.writer = ResultWriter(out_dir or self.config.out_dir, header=self._header())
        manifest = self._manifest()
        self.writer.attach_manifest(manifest)
        self.checks = []
        self.breaches = []

        runners: Dict[ExperimentKind, Callable[[], None]] = {
            ExperimentKind.VALIDATE_BASIS: self.validate_basis,
            ExperimentKind.PROPAGATE: self.propagate,
            ExperimentKind.ENERGY: self.energy,
            ExperimentKind.COMPARE_MC: self.compare_mc,
            ExperimentKind.CONVERGENCE: self.convergence,
        }

        self.logger.info(f"Starting {kind.value} experiment ({self.basis.n_modes} velocity modes, c0={self.c0:.6g})")
        try:
            runners[kind]()
            self.writer.write_table("checks.csv", ["check", "value", "tolerance", "passed"], self.checks)
        except InvariantBreach as e:
            manifest.breaches.append(e.invariant)
            manifest.complete("breached")
            self.writer.write_manifest()
            raise
        except Exception:
            manifest.complete("failed")
            self.writer.write_manifest()
            raise

        manifest.breaches.extend(self.breaches)
        manifest.complete("breached" if self.breaches else "passed")
        self.writer.write_manifest()
        if self.breaches:
            raise InvariantBreach(self.breaches[0], f"{len(self.breaches)} check(s) failed: {', '.join(self.breaches)}")

        self.logger.info(f"{kind.value} experiment passed in {manifest.wall_clock_s:.1f}s")
        return manifest

    def _solve(self, cfg: Optional[PropagatorConfig] = None) -> ChaosSolution:
        """Propaga θ₀; variantes da configuração recebem uma grade dimensionada para a sua ordem N."""
        if cfg is None:
            cfg, grid = self.config.propagator, self.config.grid
        else:
            grid = GridSpec.for_chaos(self.config.dim, self.config.grid.base_radius, self.config.shell_radius, cfg.N)
        return solve_propagator(
            self.theta0, self.basis, cfg, grid=grid, workers=self.workers, show_progress=self.show_progress
        )

    # validate-basis
    def validate_basis(self) -> None:
        basis = self.basis
        dim = basis.dim
        rng = np.random.default_rng(GaussianSample.seed_sequence(self.config.master_seed, 0, 2))
        columns = ["k", *[f"z_{j + 1}" for j in range(dim)], *[f"e_{j + 1}" for j in range(dim)], "amplitude", "parity"]
        self.writer.write_table("basis.csv", columns, basis_rows(basis))

        expected = half_lattice_mode_count(dim, basis.shell_radius)
        self.check("mode count", basis.n_modes, 0.0, basis.n_modes == expected)

        divergence = float(np.max(np.abs(np.sum(basis.wavevectors() * basis.polarizations(), axis=1)), initial=0.0))
        self.check("divergence-free modes", divergence, ROUNDOFF, divergence <= ROUNDOFF)

        matrix, c0 = covariance_at_zero(basis)
        off_diagonal = float(np.max(np.abs(matrix - np.diag(np.diag(matrix)))))
        spread = float(np.ptp(np.diag(matrix)))
        self.check("isotropy off-diagonal", off_diagonal, 1e-14 * max(1.0, c0), off_diagonal <= 1e-14 * max(1.0, c0))
        self.check("isotropy diagonal", spread, ROUNDOFF * max(1.0, c0), spread <= ROUNDOFF * max(1.0, c0))

        points = rng.uniform(0.0, 2.0 * math.pi, size=(16, dim))
        local = kernel_sum(basis, points, points)
        x_dependence = float(np.max(np.abs(local - matrix[None])))
        self.check("x-independence of sum sigma sigma^T", x_dependence, ROUNDOFF, x_dependence <= ROUNDOFF)

        x = rng.uniform(0.0, 2.0 * math.pi, size=(8, dim))
        y = rng.uniform(0.0, 2.0 * math.pi, size=(8, dim))
        kernel_gap = float(np.max(np.abs(kernel_sum(basis, x, y) - truncated_covariance(basis.spec, basis.shell_radius, x - y))))
        self.check("kernel identity", kernel_gap, IDENTITY_TOLERANCE, kernel_gap <= IDENTITY_TOLERANCE)

        worst = 0.0
        for _ in range(20):
            f = random_band_field(dim, 3, rng=rng)
            gradient = f.grad_norm_sq()
            worst = max(worst, abs(advection_energy(basis, f) - c0 * gradient) / gradient)
        self.check("norm identity", worst, IDENTITY_TOLERANCE, worst <= IDENTITY_TOLERANCE)

        self.logger.info(f"Basis validated: {basis.n_modes} modes, c0={c0:.12g}")
        self.checks.append(["c0", c0, 0.0, True])

    # propagate
    def propagate(self) -> None:
        cfg = self.config.propagator
        sol = self._solve()
        dim = self.config.dim
        T = sol.times[-1]

        z_columns = [f"z_{j + 1}" for j in range(dim)]
        self.writer.write_table(
            "coefficients.csv",
            ["rank", "t", *z_columns, "re", "im"],
            sol.coefficient_rows(max_level=self.config.dump_max_level),
            {"dump_max_level": self.config.dump_max_level},
        )

        rows = []
        for t in sol.times:
            mean, second, grad = chaos_moments(sol, t)
            rows.append([t, mean.coeff((0,) * dim).real, second, grad, *sol.level_norms(t)])
        level_columns = [f"level_{n}" for n in range(sol.N + 1)]
        self.writer.write_table(
            "moments.csv", ["t", "mean_zero_mode", "second_moment_l2", "grad_second_moment", *level_columns], rows
        )

        sample = GaussianSample.draw(cfg.n_t, cfg.n_w, self.config.master_seed, 0)
        self.writer.write_sample("sample.csv", sample)
        field = reconstruct(sol, sample, T)
        self.writer.write_table(
            "reconstruction.csv",
            [*z_columns, "re", "im"],
            [[*z, c.real, c.imag] for z, c in sorted(field.coeffs.items())],
            {"t": T, "stream": 0},
        )

        theta0_norm = self.theta0.norm_sq()
        start_gap = abs(rows[0][2] - theta0_norm) / max(theta0_norm, 1e-300)
        if sol.times[0] == 0.0:
            self.check("initial second moment", start_gap, ROUNDOFF, start_gap <= ROUNDOFF)
        zero_mode = [row[1] for row in rows]
        drift = max(abs(v - zero_mode[0]) for v in zero_mode)
        self.check("zero-mode conservation", drift, ROUNDOFF, drift <= ROUNDOFF)
        defect = max(
            reality_defect(sol.level_array(n, t), dim) for n in range(sol.N + 1) for t in sol.times
        )
        limit = ROUNDOFF * max(1.0, math.sqrt(theta0_norm))
        self.check("reality of coefficients", defect, limit, defect <= limit)

    # energy
    def energy(self) -> None:
        cfg = self.config.propagator
        sol = self._solve()
        report = energy_balance_report(sol, self.basis)
        tol = self.tolerance

        self.writer.write_table(
            "energy.csv", ["t", "e_l2", "dissipation", "tail", "basis_defect", "residual"], report.rows()
        )
        self.check("energy balance residual", report.max_abs_residual(), tol, report.max_abs_residual() <= tol)
        tail_ok = all(f >= -tol for f in report.tail) and all(b >= a - tol for a, b in zip(report.tail, report.tail[1:]))
        self.check("tail nonnegative and nondecreasing", min(report.tail, default=0.0), tol, tail_ok)
        self.check("basis defect nonnegative", min(report.basis_defect, default=0.0), tol, min(report.basis_defect, default=0.0) >= -tol)
        if cfg.nu == 0.0:
            bound = max(report.e_l2) - report.theta0_norm_sq
            self.check("energy inequality", bound, tol, bound <= tol)
            held = [e + b for e, b in zip(report.e_l2, report.basis_defect)]
            rise = max((b - a for a, b in zip(held, held[1:])), default=0.0)
            self.check("retained energy nonincreasing", rise, tol, rise <= tol)

        points = tail_decay_study(self.theta0, self.basis, cfg, cfg.N, solution=sol)
        self.writer.write_table(
            "tail_decay.csv",
            ["N", "tail", "ratio", "partial_sum_gap"],
            [[p.N, p.tail, p.ratio if p.ratio is not None else float("nan"), p.partial_sum_gap] for p in points],
        )
        gap = max(abs(p.partial_sum_gap) for p in points)
        self.check("partial sums of the tail", gap, tol, gap <= tol)
        if len(points) > 3 and points[1].tail > 0.0:
            self.logger.info(f"Tail ratio F_3(T)/F_1(T) = {points[3].tail / points[1].tail:.6g}")

        self._oracle_rows(sol)

    def _oracle_rows(self, sol: ChaosSolution) -> None:
        cfg = sol.config
        T = sol.times[-1]
        time_basis = TimeBasis(T=cfg.T, n_t=cfg.n_t)
        propagated = sol.level_norms(T)
        rows = []
        for n in sorted(set(self.config.oracle.levels)):
            if n > sol.N:
                self.logger.warning(f"Oracle level {n} skipped: solution order is {sol.N}")
                continue
            arguments = dict(
                quad_order=self.config.oracle.quad_order,
                budget=self.settings.oracle_cost_budget,
                workers=self.workers,
            )
            try:
                finite = iterated_integral_level_norm(
                    self.theta0, sol.basis, cfg.nu, sol.c0_matrix, n, T, time_basis=time_basis, **arguments
                )
                white = iterated_integral_level_norm(self.theta0, sol.basis, cfg.nu, sol.c0_matrix, n, T, **arguments)
            except OracleBudgetExceeded as e:
                self.logger.warning(f"Oracle level {n} skipped: {e}")
                continue
            error = abs(propagated[n] - finite) / max(abs(finite), 1e-300)
            rows.append([n, T, propagated[n], finite, white, error])
            limit = ORACLE_TOLERANCE.get(n, DEFAULT_ORACLE_TOLERANCE)
            self.check(f"oracle equivalence level {n}", error, limit, error <= limit)
            excess = (propagated[n] - white) / max(abs(white), 1e-300)
            self.check(f"Bessel bound level {n}", excess, DEFAULT_ORACLE_TOLERANCE, excess <= DEFAULT_ORACLE_TOLERANCE)
        self.writer.write_table(
            "oracle.csv", ["N", "t", "propagator", "oracle_finite", "oracle_white_noise", "rel_error"], rows
        )

    # compare-mc
    def compare_mc(self) -> None:
        cfg = self.config.propagator
        mc = self.config.monte_carlo
        sol = self._solve()
        report = energy_balance_report(sol, self.basis)
        lower = report.e_l2[-1]
        upper = lower + report.tail[-1] + report.basis_defect[-1]
        radius = mc.galerkin_radius or self.config.grid.growth_cap

        solver = DirectMonteCarloSolver(
            self.theta0, self.basis, cfg, mc.dt_mc, galerkin_radius=radius, workers=self.workers,
            show_progress=self.show_progress,
        )
        estimates = [solver.second_moment(self.config.n_paths, self.config.master_seed)]
        coarse_dt = 2.0 * mc.dt_mc
        if abs(cfg.T / coarse_dt - round(cfg.T / coarse_dt)) < 1e-9:
            coarse = DirectMonteCarloSolver(
                self.theta0, self.basis, cfg, coarse_dt, galerkin_radius=radius, workers=self.workers,
                show_progress=self.show_progress,
            ).second_moment(self.config.n_paths, self.config.master_seed)
            estimates.append(coarse.model_copy(update={"estimator": "second_moment_l2_coarse"}))

        rows = [
            [e.estimator, e.n_paths, e.dt_mc, e.value, e.std_error, lower, upper, e.within(lower, upper)]
            for e in estimates
        ]
        self.writer.write_table(
            "mc_estimate.csv",
            ["estimator", "n_paths", "dt_mc", "value", "std_error", "chaos_e_l2", "chaos_upper", "within_3se"],
            rows,
        )
        main = estimates[0]
        distance = max(lower - main.value, main.value - upper, 0.0) / max(main.std_error, 1e-300)
        self.check("chaos vs Monte Carlo within 3 standard errors", distance, 3.0, main.within(lower, upper))
        if len(estimates) > 1:
            shift = abs(estimates[1].value - main.value) / max(main.std_error, 1e-300)
            self.check("Monte Carlo step refinement within 1 standard error", shift, 1.0, shift < 1.0)

        # Um único Monte Carlo fino alimenta a varredura em N e a varredura em n_t
        orders = [n for n in mc.pathwise_orders if n <= sol.N]
        top = max(orders, default=sol.N)
        targets: Dict[Any, Any] = {("N", N): (sol, N) for N in orders}
        for n_t in range(1, cfg.n_t):
            targets[("n_t", n_t)] = (self._solve(cfg.with_updates(n_t=n_t, N=top)), top)
        targets[("n_t", cfg.n_t)] = (sol, top)
        gaps = paired_final_gaps(
            sol, targets, mc.pathwise_dt_mc, mc.pathwise_paths, self.config.master_seed,
            galerkin_radius=radius, workers=self.workers,
        )
        errors = {N: gaps[("N", N)] for N in orders}
        self.writer.write_table(
            "pathwise.csv",
            ["path", "N", "error"],
            [[p, N, errors[N][p]] for p in range(mc.pathwise_paths) for N in sorted(errors)],
            {"dt_mc": mc.pathwise_dt_mc},
        )
        summary = [[N, *self._mean_and_error(errors[N])] for N in sorted(errors)]
        self.writer.write_table(
            "pathwise_summary.csv", ["N", "mean_error", "std_error", "n_paths"], summary, {"dt_mc": mc.pathwise_dt_mc}
        )
        means = [row[1] for row in summary]
        rise = max((b - a for a, b in zip(means, means[1:])), default=0.0)
        self.check("pathwise error decreasing in N", rise, 0.0, all(b < a for a, b in zip(means, means[1:])))

        coupling = [[n_t, *self._mean_and_error(gaps[("n_t", n_t)])] for n_t in range(1, cfg.n_t + 1)]
        self.writer.write_table(
            "noise_coupling.csv", ["n_t", "mean_error", "std_error", "n_paths"], coupling,
            {"dt_mc": mc.pathwise_dt_mc, "N": top},
        )
        # Platô permitido: o aumento pareado entre n_t consecutivos fica dentro de 3 erros padrão
        worst = 0.0
        for n_t in range(1, cfg.n_t):
            step = np.asarray(gaps[("n_t", n_t + 1)]) - np.asarray(gaps[("n_t", n_t)])
            mean, spread, _ = self._mean_and_error(step)
            worst = max(worst, (mean - ROUNDOFF) / max(spread, 1e-300) if mean > ROUNDOFF else 0.0)
        self.check("pathwise gap nonincreasing in n_t", worst, 3.0, worst <= 3.0)

    @staticmethod
    def _mean_and_error(values: Sequence[float]) -> List[float]:
        """[média, erro padrão, n] de uma lista de erros por trajetória."""
        data = np.asarray(values, dtype=float)
        spread = float(np.std(data, ddof=1) / math.sqrt(len(data))) if len(data) > 1 else 0.0
        return [float(np.mean(data)), spread, len(data)]

    # convergence
    def convergence(self) -> None:
        cfg = self.config.propagator
        study = self.config.convergence
        self._convergence_in_N(cfg, study.N_values)
        self._convergence_in_R(study.shell_radii)
        self._convergence_in_nt(cfg, study.n_t_values)
        self._convergence_in_dt(cfg, study.dt_values, study.reference_dt)

    def _convergence_in_N(self, cfg: PropagatorConfig, N_values: Sequence[int]) -> None:
        orders = sorted(set(N_values))
        sol = self._solve(cfg.with_updates(N=max(orders)))
        rows = []
        for N in orders:
            balance = truncated_balance(sol, N)
            rows.append([N, balance["e_l2"], balance["dissipation"], balance["tail"], balance["basis_defect"], balance["deficit"], balance["residual"]])
        self.writer.write_table(
            "convergence_N.csv", ["N", "e_l2", "dissipation", "tail", "basis_defect", "deficit", "residual"], rows
        )
        deficits = [row[5] for row in rows]
        if cfg.nu > 0.0 and cfg.n_w > 0:
            strict = all(b < a for a, b in zip(deficits, deficits[1:]))
            self.check("energy deficit decreasing in N", max((b - a for a, b in zip(deficits, deficits[1:])), default=0.0), 0.0, strict)

    def _convergence_in_R(self, radii: Sequence[int]) -> None:
        rows = []
        for R in sorted(set(radii)):
            basis = build_divergence_free_basis(self.config.covariance, R)
            _, c0 = covariance_at_zero(basis)
            rows.append([R, basis.n_modes, c0])
        self.writer.write_table("convergence_R.csv", ["shell_radius", "n_modes", "c0"], rows)
        values = [row[2] for row in rows]
        self.check("c0 nondecreasing in shell_radius", 0.0, 0.0, all(b >= a for a, b in zip(values, values[1:])))

    def _convergence_in_nt(self, cfg: PropagatorConfig, n_t_values: Sequence[int]) -> None:
        T = cfg.T
        rows = []
        white = float("nan")
        try:
            white = iterated_integral_level_norm(
                self.theta0, self.active_basis, cfg.nu, self.c0_matrix, 1, T,
                quad_order=self.config.oracle.quad_order, budget=self.settings.oracle_cost_budget, workers=self.workers,
            )
        except OracleBudgetExceeded as e:
            self.logger.warning(f"White-noise reference skipped: {e}")
        for n_t in sorted(set(n_t_values)):
            sol = self._solve(cfg.with_updates(n_t=n_t, N=1))
            level_one = sol.level_norms(sol.times[-1])[1]
            parseval = float(np.sum(time_basis_antiderivatives(TimeBasis(T=T, n_t=n_t), 0.5 * T) ** 2))
            rows.append([n_t, level_one, white, parseval, 0.5 * T])
        self.writer.write_table(
            "convergence_nt.csv", ["n_t", "level_1_norm", "white_noise_level_1", "parseval_sum", "parseval_limit"], rows
        )
        norms = [row[1] for row in rows]
        sums = [row[3] for row in rows]
        self.check("level-1 norm nondecreasing in n_t", 0.0, ROUNDOFF, all(b >= a * (1.0 - ROUNDOFF) for a, b in zip(norms, norms[1:])))
        self.check("Brownian Parseval sums nondecreasing", 0.0, ROUNDOFF, all(b >= a - ROUNDOFF for a, b in zip(sums, sums[1:])))
        if not math.isnan(white) and norms:
            excess = (max(norms) - white) / max(white, 1e-300)
            self.check("level-1 norm below white-noise value", excess, DEFAULT_ORACLE_TOLERANCE, excess <= DEFAULT_ORACLE_TOLERANCE)

    def _convergence_in_dt(self, cfg: PropagatorConfig, dt_values: Sequence[float], reference_dt: float) -> None:
        T = cfg.T
        reference = self._solve(cfg.with_updates(dt=reference_dt, output_times=(0.0, T)))
        reference_norm = math.sqrt(sum(reference.level_norms(T)))
        scale = (2.0 * math.pi) ** self.config.dim
        rows = []
        for dt in sorted(set(dt_values), reverse=True):
            sol = self._solve(cfg.with_updates(dt=dt, output_times=(0.0, T)))
            gap = sum(
                scale * float(np.sum(np.abs(sol.level_array(n, T) - reference.level_array(n, T)) ** 2))
                for n in range(sol.N + 1)
            )
            rows.append([dt, math.sqrt(gap) / max(reference_norm, 1e-300)])
        fit = linregress(np.log([row[0] for row in rows]), np.log([max(row[1], 1e-300) for row in rows]))
        self.writer.write_table(
            "convergence_dt.csv", ["dt", "rel_error"], rows, {"reference_dt": reference_dt, "slope": float(fit.slope)}
        )
        self.logger.info(f"Integrator order: fitted slope {fit.slope:.3f}")
        self.check("integrator order", float(fit.slope), MIN_TIME_ORDER, fit.slope >= MIN_TIME_ORDER)

    def get_summary(self) -> Dict[str, Any]:
        """Estado da última execução."""
        return {
            "kind": self.config.kind.value,
            "basis": self.basis.get_summary(),
            "c0": self.c0,
            "multiindex_count": self.config.propagator.multiindex_count,
            "checks": len(self.checks),
            "breaches": list(self.breaches),
            "configuration": self.settings.get_summary(),
        }


def run_experiment(
    config: ExperimentConfig,
    out_dir: Optional[str] = None,
    workers: Optional[int] = None,
    show_progress: Optional[bool] = None,
) -> RunManifest:
    return ExperimentSystem(config, workers=workers, show_progress=show_progress).run_experiment(out_dir)
